// qtomo command line: simulate data sets, estimate states and run the
// n / length sweeps.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qtomo/qtomo.hpp"

namespace {

using namespace qtomo;

struct Options {
  std::vector<double> true_state;
  std::vector<double> direction;
  std::vector<double> lengths;
  std::vector<std::uint64_t> n_values;
  std::uint64_t reps = 5;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  double kappa = 0.0;
  double lambda = 0.0;
  int grid_points = 128;
  std::string domain = "bloch";
  std::string out;
  std::string data;
  bool emit_reps = false;
  unsigned threads = 1;
};

BlochVector to_bloch(const std::vector<double>& v, const char* what) {
  if (v.size() != 3) throw CLI::ValidationError(what, "expects three comma-separated components");
  return {v[0], v[1], v[2]};
}

IntegratorConfig integrator_from(const Options& o) {
  IntegratorConfig cfg;
  cfg.grid_points_per_axis = o.grid_points;
  cfg.domain = o.domain == "paper-u" ? ConditioningDomain::UBall : ConditioningDomain::BlochBall;
  return cfg;
}

// All options live on the top-level app and subcommands fall through to it,
// so one flat key=value config file serves every subcommand.
void add_options(CLI::App& app, Options& o) {
  app.set_config("--config", "", "Read options from a key=value file; command-line flags take precedence");
  app.add_option("--true-state", o.true_state, "True Bloch vector x,y,z")->delimiter(',');
  app.add_option("--direction", o.direction, "Sweep direction x,y,z (default 1,1,1)")->delimiter(',');
  app.add_option("--lengths", o.lengths, "Bloch vector lengths in [0,1]")->delimiter(',');
  app.add_option("--n-values", o.n_values, "Measurements per axis, comma separated")->delimiter(',');
  app.add_option("--reps", o.reps, "Repetitions per experiment point")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Base seed (unsigned 64-bit)");
  app.add_option("--stream", o.stream, "Stream id for simulate/estimate");
  app.add_option("--prior-kappa", o.kappa, "Prior pseudo-measurement count kappa")->check(CLI::NonNegativeNumber);
  app.add_option("--prior-lambda", o.lambda, "Prior pseudo +1 count lambda")->check(CLI::NonNegativeNumber);
  app.add_option("--grid-points", o.grid_points, "Gauss-Legendre points per axis for ball conditioning");
  app.add_option("--conditioning-domain", o.domain, "Conditioning domain")->check(CLI::IsMember({"bloch", "paper-u"}));
  app.add_option("--data", o.data, "Raw data file written by 'simulate' (estimate)");
  app.add_option("--out", o.out, "Output path (stdout when omitted)");
  app.add_flag("--emit-reps", o.emit_reps, "Also write per-repetition rows to <out>.reps.csv");
  app.add_option("--threads", o.threads, "Worker threads (0 = all hardware threads)");
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  fn(f);
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::string reps_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension();
  return p.string() + ".reps.csv";
}

void run_sweep(const Options& o, ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  if (kind == ExperimentKind::SweepLength) {
    if (!o.direction.empty()) cfg.direction = to_bloch(o.direction, "--direction");
    cfg.lengths = o.lengths;
  } else {
    cfg.true_state = to_bloch(o.true_state, "--true-state");
  }
  if (!o.n_values.empty()) cfg.n_values = o.n_values;
  cfg.reps = o.reps;
  cfg.seed = o.seed;
  cfg.prior = PriorParams(o.kappa, o.lambda);
  cfg.integrator = integrator_from(o);
  cfg.threads = o.threads;
  const ExperimentResult res = run_experiment(cfg);
  with_output(o.out, [&](std::ostream& os) { write_aggregate_csv(os, res.rows); });
  if (o.emit_reps) {
    if (o.out.empty()) throw std::runtime_error("--emit-reps requires --out");
    with_output(reps_path(o.out), [&](std::ostream& os) { write_repetition_csv(os, res); });
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-qubit state tomography: simulation, estimation and sweeps"};
  app.require_subcommand(1);
  Options o;

  add_options(app, o);
  auto* sim = app.add_subcommand("simulate", "Simulate one data set (--true-state, --n-values N) and dump outcomes");
  auto* est = app.add_subcommand("estimate", "Apply the three estimators to one data set (--data or --true-state)");
  auto* sn = app.add_subcommand("sweep-n", "Sweep the number of measurements per axis (--true-state)");
  auto* sl = app.add_subcommand("sweep-length", "Sweep the Bloch vector length along --direction (--lengths)");
  for (auto* cmd : {sim, est, sn, sl}) cmd->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      if (o.true_state.empty()) throw std::invalid_argument("simulate needs --true-state");
      if (o.n_values.size() != 1) throw std::invalid_argument("simulate takes exactly one n value");
      const SimSeed seed{o.seed, o.stream};
      const auto data = simulate_dataset(to_bloch(o.true_state, "--true-state"), o.n_values[0], seed);
      with_output(o.out, [&](std::ostream& os) { write_raw(os, data, seed); });
    } else if (est->parsed()) {
      CountStatistics counts;
      if (!o.data.empty()) {
        std::ifstream f(o.data);
        if (!f) throw std::runtime_error("cannot open '" + o.data + "'");
        counts = read_raw(f).data.counts();
      } else {
        if (o.true_state.empty() || o.n_values.size() != 1) {
          throw std::invalid_argument("estimate needs --data, or --true-state with one --n-values");
        }
        counts = simulate_dataset(to_bloch(o.true_state, "--true-state"), o.n_values[0], SimSeed{o.seed, o.stream})
                     .counts();
      }
      const auto results = estimate_all(counts, PriorParams(o.kappa, o.lambda), integrator_from(o));
      with_output(o.out, [&](std::ostream& os) {
        os << "method,est_1,est_2,est_3,physical\n";
        for (const auto& r : results) {
          os << to_string(r.method);
          for (std::size_t i = 0; i < 3; ++i) os << ',' << format_double(r.vector[i]);
          os << ',' << (r.physical ? 1 : 0) << '\n';
        }
      });
    } else if (sn->parsed()) {
      if (o.true_state.empty()) throw std::invalid_argument("sweep-n needs --true-state");
      run_sweep(o, ExperimentKind::SweepN);
    } else if (sl->parsed()) {
      if (o.lengths.empty()) throw std::invalid_argument("sweep-length needs --lengths");
      run_sweep(o, ExperimentKind::SweepLength);
    }
  } catch (const std::exception& e) {
    std::cerr << "qtomo: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
