// qtomo.hpp
// Umbrella header for the single-qubit tomography library.

#pragma once

#include "qtomo/estimators.hpp"
#include "qtomo/experiment.hpp"
#include "qtomo/measurement.hpp"
#include "qtomo/metrics.hpp"
#include "qtomo/qubit.hpp"
