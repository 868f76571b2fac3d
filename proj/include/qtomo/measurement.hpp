// measurement.hpp
// Simulated Pauli measurements on identically prepared qubits.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtomo/qubit.hpp"

namespace qtomo {

/// Seed for one simulated data set. Repetitions of the same experiment use the
/// same `seed` and distinct `stream_id`s.
struct SimSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const SimSeed&, const SimSeed&) = default;
};

/// Sufficient statistics of a data set: n measurements per axis and the
/// number of +1 outcomes on each axis.
struct CountStatistics {
  std::uint64_t n = 0;
  std::array<std::uint64_t, 3> plus{0, 0, 0};

  CountStatistics() = default;
  CountStatistics(std::uint64_t n_, std::array<std::uint64_t, 3> plus_) : n(n_), plus(plus_) {
    for (auto l : plus) {
      if (l > n) throw std::invalid_argument("plus count exceeds the number of measurements");
    }
  }

  friend bool operator==(const CountStatistics&, const CountStatistics&) = default;
};

/// The three outcome strings (sigma_1, sigma_2, sigma_3 measured n times each)
/// together with their +1 counts.
class MeasurementDataSet {
 public:
  explicit MeasurementDataSet(std::array<std::vector<std::int8_t>, 3> outcomes) : outcomes_(std::move(outcomes)) {
    const auto n = outcomes_[0].size();
    if (n == 0) throw std::invalid_argument("data set needs at least one measurement per axis");
    std::array<std::uint64_t, 3> plus{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (outcomes_[i].size() != n) throw std::invalid_argument("outcome strings must have equal length");
      for (auto v : outcomes_[i]) {
        if (v == 1) {
          ++plus[i];
        } else if (v != -1) {
          throw std::invalid_argument("outcomes must be +1 or -1");
        }
      }
    }
    counts_ = CountStatistics(n, plus);
  }

  std::uint64_t n() const { return counts_.n; }
  const CountStatistics& counts() const { return counts_; }
  std::uint64_t plus_count(Axis a) const { return counts_.plus[axis_index(a)]; }
  const std::vector<std::int8_t>& outcomes(Axis a) const { return outcomes_[axis_index(a)]; }

  /// FNV-1a hash of the outcome strings; equal data sets have equal hashes.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t byte) {
      h ^= byte;
      h *= 0x100000001b3ULL;
    };
    for (const auto& axis : outcomes_) {
      for (auto v : axis) mix(static_cast<std::uint8_t>(v));
      mix(0xff);
    }
    return h;
  }

  friend bool operator==(const MeasurementDataSet& a, const MeasurementDataSet& b) {
    return a.outcomes_ == b.outcomes_;
  }

 private:
  std::array<std::vector<std::int8_t>, 3> outcomes_;
  CountStatistics counts_;
};

/// Probability Tr(rho P_axis^+) = (1 + s_axis)/2 of the +1 outcome.
inline double outcome_probability(const BlochVector& s, Axis axis) {
  if (!s.is_physical()) throw InvalidState("outcome probability needs a physical state");
  return std::clamp(0.5 * (1.0 + s[axis_index(axis)]), 0.0, 1.0);
}

/// Generator for one (seed, stream, axis) triple.
///
/// Stream format "qtomo-stream-v1": std::mt19937_64 seeded through
/// std::seed_seq with the 32-bit words {seed_lo, seed_hi, stream_lo,
/// stream_hi, axis}. Uniforms use the top 53 bits of each draw. Every step is
/// fully specified by the C++ standard, so data sets are identical across
/// compilers and standard libraries. Changing any of this changes all
/// recorded outputs.
class StreamGenerator {
 public:
  StreamGenerator(const SimSeed& seed, Axis axis) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed.seed), static_cast<std::uint32_t>(seed.seed >> 32),
                      static_cast<std::uint32_t>(seed.stream_id), static_cast<std::uint32_t>(seed.stream_id >> 32),
                      static_cast<std::uint32_t>(static_cast<int>(axis))};
    engine_.seed(seq);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Draws n independent outcomes per axis with Prob(+1) = (1 + s_i)/2.
inline MeasurementDataSet simulate_dataset(const BlochVector& s, std::uint64_t n, const SimSeed& seed) {
  if (n == 0) throw std::invalid_argument("number of measurements must be at least 1");
  std::array<std::vector<std::int8_t>, 3> outcomes;
  for (Axis axis : kAxes) {
    const double p = outcome_probability(s, axis);
    StreamGenerator gen(seed, axis);
    auto& out = outcomes[axis_index(axis)];
    out.resize(n);
    for (auto& v : out) v = gen.uniform() < p ? std::int8_t{1} : std::int8_t{-1};
  }
  return MeasurementDataSet(std::move(outcomes));
}

// Raw dump: per axis a header line "axis=<i> n=<n> seed=<seed>:<stream>"
// followed by one line of space-separated "+1"/"-1" entries.

inline void write_raw(std::ostream& os, const MeasurementDataSet& data, const SimSeed& seed) {
  for (Axis axis : kAxes) {
    os << "axis=" << static_cast<int>(axis) << " n=" << data.n() << " seed=" << seed.seed << ':' << seed.stream_id
       << '\n';
    const auto& v = data.outcomes(axis);
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (j) os << ' ';
      os << (v[j] > 0 ? "+1" : "-1");
    }
    os << '\n';
  }
}

struct RawDump {
  MeasurementDataSet data;
  SimSeed seed;
};

inline RawDump read_raw(std::istream& is) {
  std::array<std::vector<std::int8_t>, 3> outcomes;
  std::array<bool, 3> seen{false, false, false};
  SimSeed seed;
  std::string header;
  std::string line;
  while (std::getline(is, header)) {
    if (header.empty()) continue;
    int axis = 0;
    unsigned long long n = 0, sd = 0, st = 0;
    if (std::sscanf(header.c_str(), "axis=%d n=%llu seed=%llu:%llu", &axis, &n, &sd, &st) != 4) {
      throw std::runtime_error("malformed raw data header: " + header);
    }
    const auto idx = axis_index(axis_from_int(axis));
    if (seen[idx]) throw std::runtime_error("duplicate axis in raw data");
    seen[idx] = true;
    seed = SimSeed{sd, st};
    if (!std::getline(is, line)) throw std::runtime_error("missing outcome line for axis " + std::to_string(axis));
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (tok == "+1") {
        outcomes[idx].push_back(1);
      } else if (tok == "-1") {
        outcomes[idx].push_back(-1);
      } else {
        throw std::runtime_error("bad outcome token '" + tok + "'");
      }
    }
    if (outcomes[idx].size() != n) throw std::runtime_error("outcome count does not match header n");
  }
  if (!(seen[0] && seen[1] && seen[2])) throw std::runtime_error("raw data must contain all three axes");
  return {MeasurementDataSet(std::move(outcomes)), seed};
}

}  // namespace qtomo
