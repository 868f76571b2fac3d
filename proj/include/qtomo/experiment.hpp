// experiment.hpp
// Experiment sweeps over the number of measurements and over the Bloch-vector
// length, with CSV output.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "qtomo/estimators.hpp"
#include "qtomo/measurement.hpp"
#include "qtomo/metrics.hpp"
#include "qtomo/qubit.hpp"

namespace qtomo {

enum class ExperimentKind { SweepN, SweepLength, Single };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::SweepN:
      return "sweep_n";
    case ExperimentKind::SweepLength:
      return "sweep_length";
    case ExperimentKind::Single:
      return "single";
  }
  return "?";
}

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SweepN;
  /// True state for SweepN and Single.
  BlochVector true_state;
  /// Direction (need not be normalized) and lengths for SweepLength.
  BlochVector direction = pure_reference_state();
  std::vector<double> lengths;
  std::vector<std::uint64_t> n_values{100, 200, 300, 400, 500, 600, 700, 800, 900};
  std::uint64_t reps = 5;
  std::uint64_t seed = 1;
  PriorParams prior;
  IntegratorConfig integrator;
  /// Worker threads; 0 means one per hardware thread.
  unsigned threads = 1;

  void validate() const {
    if (n_values.empty()) throw std::invalid_argument("at least one n value is required");
    for (auto n : n_values) {
      if (n == 0) throw std::invalid_argument("n values must be >= 1");
    }
    if (reps == 0) throw std::invalid_argument("reps must be >= 1");
    integrator.validate();
    if (kind == ExperimentKind::SweepLength) {
      if (direction.norm() == 0.0) throw std::invalid_argument("direction must be nonzero");
      if (lengths.empty()) throw std::invalid_argument("at least one length is required");
      for (double l : lengths) {
        if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("lengths must lie in [0, 1]");
      }
    } else {
      if (!true_state.is_physical()) throw InvalidState("true state must lie in the Bloch ball");
      if (kind == ExperimentKind::Single && n_values.size() != 1) {
        throw std::invalid_argument("a single experiment takes exactly one n value");
      }
    }
  }
};

/// One experiment point: a true state and a number of measurements per axis.
struct ExperimentPoint {
  std::uint64_t n = 0;
  BlochVector truth;
  double length = 0.0;
};

/// One CSV row: an AggregateRow tagged with its experiment kind and length.
struct ExperimentRow {
  ExperimentKind kind = ExperimentKind::SweepN;
  double length = 0.0;
  AggregateRow agg;
};

struct ExperimentResult {
  std::vector<ExperimentPoint> points;
  /// Ordered by (point, method).
  std::vector<ExperimentRow> rows;
  /// Per point, per method (kMethods order), ordered by repetition.
  std::vector<std::array<std::vector<RepetitionResult>, 3>> repetitions;
};

/// Experiment points in output order. SweepLength varies the length fastest.
inline std::vector<ExperimentPoint> experiment_points(const ExperimentConfig& cfg) {
  std::vector<ExperimentPoint> pts;
  if (cfg.kind == ExperimentKind::SweepLength) {
    const double len = cfg.direction.norm();
    const BlochVector unit = (1.0 / len) * cfg.direction;
    for (auto n : cfg.n_values) {
      for (double l : cfg.lengths) pts.push_back({n, l * unit, l});
    }
  } else {
    for (auto n : cfg.n_values) pts.push_back({n, cfg.true_state, cfg.true_state.norm()});
  }
  return pts;
}

/// Stream id of repetition `rep` at point index `point`.
inline constexpr std::uint64_t stream_id(std::uint64_t point, std::uint64_t rep) { return (point << 32) | rep; }

namespace detail {

// Runs fn(i) for i in [0, count) on `threads` workers. Every index runs
// exactly once; the first failing index (lowest i) is rethrown.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

/// Runs every point of the configuration. For each (point, repetition) one
/// data set is simulated and all three methods are applied to it.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  out.points = experiment_points(cfg);
  const std::size_t np = out.points.size();
  const std::size_t items = np * cfg.reps;

  std::vector<std::array<RepetitionResult, 3>> work(items);
  detail::parallel_for(items, cfg.threads, [&](std::size_t idx) {
    const std::size_t p = idx / cfg.reps;
    const std::uint64_t rep = idx % cfg.reps;
    const auto& pt = out.points[p];
    try {
      const MeasurementDataSet data = simulate_dataset(pt.truth, pt.n, SimSeed{cfg.seed, stream_id(p, rep)});
      const auto& counts = data.counts();
      const auto hash = data.fingerprint();
      const auto post = bayes_posterior(counts, cfg.prior).variance;
      const auto est = estimate_all(counts, cfg.prior, cfg.integrator);
      for (std::size_t m = 0; m < 3; ++m) {
        const bool bayes = est[m].method != Method::LS;
        work[idx][m] = make_repetition_result(rep, pt.truth, est[m],
                                              bayes ? std::optional(post) : std::nullopt, hash);
      }
    } catch (const std::exception& e) {
      throw ExperimentError("n=" + std::to_string(pt.n) + " repetition=" + std::to_string(rep) + ": " + e.what());
    }
  });

  out.repetitions.resize(np);
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t m = 0; m < 3; ++m) {
      auto& dst = out.repetitions[p][m];
      dst.reserve(cfg.reps);
      for (std::uint64_t r = 0; r < cfg.reps; ++r) dst.push_back(work[p * cfg.reps + r][m]);
      out.rows.push_back({cfg.kind, out.points[p].length,
                          aggregate(kMethods[m], out.points[p].n, out.points[p].truth, dst)});
    }
  }
  return out;
}

inline ExperimentResult run_sweep_n(ExperimentConfig cfg) {
  cfg.kind = ExperimentKind::SweepN;
  return run_experiment(cfg);
}

inline ExperimentResult run_sweep_length(ExperimentConfig cfg) {
  cfg.kind = ExperimentKind::SweepLength;
  return run_experiment(cfg);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kAggregateHeader =
    "kind,method,n,s_true_1,s_true_2,s_true_3,length,reps,phi,chi,postvar_1,postvar_2,postvar_3,empvar_1,empvar_2,"
    "empvar_3";

inline constexpr std::string_view kRepetitionHeader = "method,n,rep,est_1,est_2,est_3,fidelity,hs";

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("bad number in CSV: '" + std::string(s) + "'");
  }
  return v;
}

inline void write_aggregate_csv(std::ostream& os, std::span<const ExperimentRow> rows) {
  os << kAggregateHeader << '\n';
  for (const auto& r : rows) {
    const auto& a = r.agg;
    os << to_string(r.kind) << ',' << to_string(a.method) << ',' << a.n;
    for (std::size_t i = 0; i < 3; ++i) os << ',' << format_double(a.truth[i]);
    os << ',' << format_double(r.length) << ',' << a.reps << ',' << format_double(a.phi) << ','
       << format_double(a.chi);
    for (const auto* col : {&a.mean_posterior_variance, &a.empirical_variance}) {
      for (std::size_t i = 0; i < 3; ++i) {
        os << ',';
        if (*col) os << format_double((**col)[i]);
      }
    }
    os << '\n';
  }
}

inline void write_repetition_csv(std::ostream& os, const ExperimentResult& res) {
  os << kRepetitionHeader << '\n';
  for (std::size_t p = 0; p < res.points.size(); ++p) {
    for (const auto& per_method : res.repetitions[p]) {
      for (const auto& r : per_method) {
        os << to_string(r.method) << ',' << res.points[p].n << ',' << r.repetition;
        for (std::size_t i = 0; i < 3; ++i) os << ',' << format_double(r.estimate[i]);
        os << ',' << format_double(r.fidelity) << ',' << format_double(r.hs_distance) << '\n';
      }
    }
  }
}

/// Writes the aggregate table to `path`. Throws std::runtime_error on I/O
/// failure.
inline void emit_csv(std::span<const ExperimentRow> rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_csv needs at least one row");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_aggregate_csv(f, rows);
  f.flush();
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

namespace detail {
inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline Method parse_method(std::string_view s) {
  for (auto m : kMethods) {
    if (to_string(m) == s) return m;
  }
  throw std::runtime_error("unknown method '" + std::string(s) + "'");
}

inline ExperimentKind parse_kind(std::string_view s) {
  for (auto k : {ExperimentKind::SweepN, ExperimentKind::SweepLength, ExperimentKind::Single}) {
    if (to_string(k) == s) return k;
  }
  throw std::runtime_error("unknown experiment kind '" + std::string(s) + "'");
}
}  // namespace detail

/// Parses a table written by write_aggregate_csv.
inline std::vector<ExperimentRow> read_aggregate_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kAggregateHeader) throw std::runtime_error("unexpected CSV header");
  std::vector<ExperimentRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 16) throw std::runtime_error("expected 16 CSV fields, got " + std::to_string(f.size()));
    ExperimentRow r;
    r.kind = detail::parse_kind(f[0]);
    r.agg.method = detail::parse_method(f[1]);
    r.agg.n = static_cast<std::uint64_t>(parse_double(f[2]));
    for (std::size_t i = 0; i < 3; ++i) r.agg.truth[i] = parse_double(f[3 + i]);
    r.length = parse_double(f[6]);
    r.agg.reps = static_cast<std::uint64_t>(parse_double(f[7]));
    r.agg.phi = parse_double(f[8]);
    r.agg.chi = parse_double(f[9]);
    auto triple = [&](std::size_t at) -> std::optional<std::array<double, 3>> {
      if (f[at].empty()) return std::nullopt;
      return std::array<double, 3>{parse_double(f[at]), parse_double(f[at + 1]), parse_double(f[at + 2])};
    };
    r.agg.mean_posterior_variance = triple(10);
    r.agg.empirical_variance = triple(13);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace qtomo
