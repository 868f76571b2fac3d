// metrics.hpp
// Aggregation of repeated estimates into average fidelity, average
// Hilbert-Schmidt distance and variance columns.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qtomo/estimators.hpp"
#include "qtomo/qubit.hpp"

namespace qtomo {

/// Mean fidelity between the truth and each estimate.
inline double average_fidelity(const BlochVector& truth, std::span<const BlochVector> estimates) {
  if (estimates.empty()) throw std::invalid_argument("average_fidelity needs at least one estimate");
  const DensityMatrix rho = bloch_to_density(truth);
  double sum = 0.0;
  for (const auto& e : estimates) sum += fidelity(rho, bloch_to_density(e));
  return sum / static_cast<double>(estimates.size());
}

/// Mean Hilbert-Schmidt distance between the truth and each estimate.
inline double average_hs(const BlochVector& truth, std::span<const BlochVector> estimates) {
  if (estimates.empty()) throw std::invalid_argument("average_hs needs at least one estimate");
  const DensityMatrix rho = bloch_to_density(truth);
  double sum = 0.0;
  for (const auto& e : estimates) sum += hs_distance(rho, bloch_to_density(e));
  return sum / static_cast<double>(estimates.size());
}

/// Per-axis sample variance with divisor m - 1.
inline std::array<double, 3> empirical_variance(std::span<const BlochVector> estimates) {
  if (estimates.size() < 2) throw std::invalid_argument("empirical_variance needs at least two estimates");
  const double m = static_cast<double>(estimates.size());
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  for (const auto& e : estimates) {
    for (std::size_t i = 0; i < 3; ++i) mean[i] += e[i];
  }
  for (auto& v : mean) v /= m;
  std::array<double, 3> var{0.0, 0.0, 0.0};
  for (const auto& e : estimates) {
    for (std::size_t i = 0; i < 3; ++i) var[i] += (e[i] - mean[i]) * (e[i] - mean[i]);
  }
  for (auto& v : var) v /= (m - 1.0);
  return var;
}

/// One method applied to one simulated data set.
struct RepetitionResult {
  std::uint64_t repetition = 0;
  Method method = Method::LS;
  BlochVector estimate;
  bool physical = true;
  double fidelity = 1.0;
  double hs_distance = 0.0;
  /// Analytic beta-posterior variance per axis (Bayesian methods only).
  std::optional<std::array<double, 3>> posterior_variance;
  /// Fingerprint of the data set the estimate was computed from.
  std::uint64_t data_hash = 0;
};

inline RepetitionResult make_repetition_result(std::uint64_t rep, const BlochVector& truth, const RawEstimate& est,
                                               const std::optional<std::array<double, 3>>& postvar,
                                               std::uint64_t data_hash) {
  const MetricsPair m = score_estimate(truth, est.vector);
  return {rep, est.method, est.vector, est.physical, m.fidelity, m.hs_distance, postvar, data_hash};
}

/// Aggregated performance of one method at one experiment point.
struct AggregateRow {
  Method method = Method::LS;
  std::uint64_t n = 0;
  BlochVector truth;
  std::uint64_t reps = 0;
  double phi = 0.0;
  double chi = 0.0;
  std::optional<std::array<double, 3>> mean_posterior_variance;
  /// Empty when reps < 2.
  std::optional<std::array<double, 3>> empirical_variance;
};

/// Folds repetition results (all of the same method) into one row. Results
/// are summed in the given order, so callers sort by repetition index first.
inline AggregateRow aggregate(Method method, std::uint64_t n, const BlochVector& truth,
                              std::span<const RepetitionResult> results) {
  if (results.empty()) throw std::invalid_argument("aggregate needs at least one repetition");
  AggregateRow row;
  row.method = method;
  row.n = n;
  row.truth = truth;
  row.reps = results.size();
  const double m = static_cast<double>(results.size());
  double fsum = 0.0, hsum = 0.0;
  std::array<double, 3> pv{0.0, 0.0, 0.0};
  bool have_pv = true;
  std::vector<BlochVector> est;
  est.reserve(results.size());
  for (const auto& r : results) {
    if (r.method != method) throw std::invalid_argument("aggregate received results of another method");
    fsum += r.fidelity;
    hsum += r.hs_distance;
    if (r.posterior_variance) {
      for (std::size_t i = 0; i < 3; ++i) pv[i] += (*r.posterior_variance)[i];
    } else {
      have_pv = false;
    }
    est.push_back(r.estimate);
  }
  row.phi = fsum / m;
  row.chi = hsum / m;
  if (have_pv) {
    for (auto& v : pv) v /= m;
    row.mean_posterior_variance = pv;
  }
  if (results.size() >= 2) row.empirical_variance = empirical_variance(est);
  return row;
}

}  // namespace qtomo
