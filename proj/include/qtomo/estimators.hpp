// estimators.hpp
// Qubit state estimators: constrained least squares and Bayesian estimation
// with a beta-form posterior per axis, optionally conditioned on the Bloch
// ball.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "qtomo/measurement.hpp"
#include "qtomo/qubit.hpp"

namespace qtomo {

enum class Method { LS, BayesUnconditioned, BayesConditioned };

inline constexpr std::array<Method, 3> kMethods{Method::LS, Method::BayesUnconditioned, Method::BayesConditioned};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::LS:
      return "LS";
    case Method::BayesUnconditioned:
      return "BayesUnconditioned";
    case Method::BayesConditioned:
      return "BayesConditioned";
  }
  return "?";
}

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape parameters of the beta-form prior shared by the three axes. The
/// prior behaves like kappa pseudo-measurements of which lambda gave +1.
struct PriorParams {
  double kappa = 0.0;
  double lambda = 0.0;

  PriorParams() = default;
  PriorParams(double kappa_, double lambda_) : kappa(kappa_), lambda(lambda_) {
    if (!(kappa >= 0.0) || !(lambda >= 0.0) || !(lambda <= kappa)) {
      throw std::invalid_argument("prior needs kappa >= 0 and 0 <= lambda <= kappa");
    }
  }
};

/// Estimate produced by one method. `physical` is set when the vector lies in
/// the Bloch ball.
struct RawEstimate {
  Method method = Method::LS;
  BlochVector vector;
  bool physical = true;
};

/// Per-axis posterior statistics: mean m_i of the beta variable, its
/// variance v_i, and the Bloch-component estimate 2 m_i - 1.
struct PosteriorSummary {
  std::array<double, 3> mean{};
  std::array<double, 3> variance{};
  BlochVector estimate;
};

enum class ConditioningDomain {
  /// Condition the Bloch components s = 2u - 1 on |s| <= 1.
  BlochBall,
  /// Condition the beta variables u in [0,1]^3 on |u| <= 1.
  UBall,
};

struct IntegratorConfig {
  int grid_points_per_axis = 128;
  ConditioningDomain domain = ConditioningDomain::BlochBall;
  std::uint64_t mc_oracle_samples = 1'000'000;

  void validate() const {
    if (grid_points_per_axis < 32 || grid_points_per_axis % 2 != 0) {
      throw std::invalid_argument("grid_points_per_axis must be even and at least 32");
    }
  }
};

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

/// pi_i = pi_i(+) - pi_i(-) = (2 l_i - n) / n.
inline BlochVector ls_relative_frequencies(const CountStatistics& c) {
  if (c.n == 0) throw std::invalid_argument("least squares needs n >= 1");
  BlochVector pi;
  const double n = static_cast<double>(c.n);
  for (std::size_t i = 0; i < 3; ++i) pi[i] = (2.0 * static_cast<double>(c.plus[i]) - n) / n;
  return pi;
}

/// Minimizer of |s - pi|^2 over the unit ball: pi itself when |pi| <= 1,
/// otherwise pi / |pi|.
inline RawEstimate ls_estimate(const CountStatistics& c) {
  BlochVector pi = ls_relative_frequencies(c);
  const double len = pi.norm();
  if (len > 1.0) {
    for (std::size_t i = 0; i < 3; ++i) pi[i] = pi[i] / len;
  }
  return {Method::LS, pi, true};
}

inline RawEstimate ls_estimate(const MeasurementDataSet& d) { return ls_estimate(d.counts()); }

// ---------------------------------------------------------------------------
// Beta posterior, closed forms
// ---------------------------------------------------------------------------

namespace detail {
inline void check_counts(std::int64_t l, std::int64_t n) {
  if (n < 0 || l < 0) throw std::invalid_argument("counts must be non-negative");
  if (l > n) throw std::invalid_argument("plus count exceeds the number of measurements");
}
}  // namespace detail

/// Posterior mean (l + 1 + lambda) / (n + kappa + 2) of the beta variable.
inline double bayes_posterior_mean(std::int64_t l, std::int64_t n, const PriorParams& prior) {
  detail::check_counts(l, n);
  return (static_cast<double>(l) + 1.0 + prior.lambda) / (static_cast<double>(n) + prior.kappa + 2.0);
}

/// Posterior variance (l+1+lambda)(n-l+1+kappa-lambda) / ((n+kappa+2)^2 (n+kappa+3)).
inline double bayes_posterior_variance(std::int64_t l, std::int64_t n, const PriorParams& prior) {
  detail::check_counts(l, n);
  const double a = static_cast<double>(l) + 1.0 + prior.lambda;
  const double b = static_cast<double>(n - l) + 1.0 + prior.kappa - prior.lambda;
  const double t = static_cast<double>(n) + prior.kappa + 2.0;
  return a * b / (t * t * (t + 1.0));
}

inline PosteriorSummary bayes_posterior(const CountStatistics& c, const PriorParams& prior) {
  PosteriorSummary out;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto l = static_cast<std::int64_t>(c.plus[i]);
    const auto n = static_cast<std::int64_t>(c.n);
    out.mean[i] = bayes_posterior_mean(l, n, prior);
    out.variance[i] = bayes_posterior_variance(l, n, prior);
    out.estimate[i] = 2.0 * out.mean[i] - 1.0;
  }
  return out;
}

/// Componentwise posterior-mean estimate 2 m_i - 1. The vector can leave the
/// unit ball; `physical` reports whether it did.
inline RawEstimate bayes_unconditioned(const CountStatistics& c, const PriorParams& prior) {
  if (c.n == 0) throw std::invalid_argument("Bayesian estimate needs n >= 1");
  const BlochVector s = bayes_posterior(c, prior).estimate;
  return {Method::BayesUnconditioned, s, s.is_physical()};
}

inline RawEstimate bayes_unconditioned(const MeasurementDataSet& d, const PriorParams& prior) {
  return bayes_unconditioned(d.counts(), prior);
}

// ---------------------------------------------------------------------------
// Ball-conditioned posterior mean
// ---------------------------------------------------------------------------

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(int k) {
  if (k < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
  // P_k(x) and P_k'(x) by the three-term recurrence.
  auto legendre = [k](double x) {
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= k; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    if (k == 1) p0 = 1.0;
    return std::array<double, 2>{p1, k * (x * p1 - p0) / (x * x - 1.0)};
  };
  GaussLegendreRule r;
  const auto n = static_cast<std::size_t>(k);
  r.nodes.resize(n);
  r.weights.resize(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (k + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x)[1];
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[n - 1 - i] = x;
    r.nodes[i] = -x;
    r.weights[n - 1 - i] = w;
    r.weights[i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

namespace detail {

// One axis of the product posterior. The integration variable x lives on
// [lo, hi]; the beta variable is p = (x - lo) / (hi - lo) with density
// proportional to p^a (1 - p)^b.
struct AxisPosterior {
  double a = 0.0;
  double b = 0.0;
  double lo = -1.0;
  double hi = 1.0;

  double to_p(double x) const { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); }
  double to_x(double p) const { return lo + (hi - lo) * p; }

  double mode_p() const { return (a + b > 0.0) ? a / (a + b) : 0.5; }

  // log density in p, up to a constant; 0 * log 0 is taken as 0.
  double log_density(double p) const {
    double v = 0.0;
    if (a > 0.0) v += (p > 0.0) ? a * std::log(p) : -std::numeric_limits<double>::infinity();
    if (b > 0.0) v += (p < 1.0) ? b * std::log1p(-p) : -std::numeric_limits<double>::infinity();
    return v;
  }

  // Interval in x where log density >= max - depth (log-concave, so it is
  // one interval around the mode).
  std::array<double, 2> window(double depth) const {
    const double mode = mode_p();
    const double cut = log_density(mode) - depth;
    auto edge = [&](double inside, double outside) {
      if (log_density(outside) >= cut) return outside;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (inside + outside);
        if (log_density(mid) >= cut) {
          inside = mid;
        } else {
          outside = mid;
        }
      }
      return outside;
    };
    return {to_x(edge(mode, 0.0)), to_x(edge(mode, 1.0))};
  }

  // Probability mass and first moment of x over [x0, x1], using the
  // regularized incomplete beta function of Beta(a + 1, b + 1) and the
  // recurrence I_p(al + 1, be) = I_p(al, be) - p^al (1 - p)^be / (al B(al, be)).
  std::array<double, 2> mass_and_moment(double x0, double x1) const {
    const double p0 = to_p(x0);
    const double p1 = to_p(x1);
    if (!(p1 > p0)) return {0.0, 0.0};
    const double alpha = a + 1.0;
    const double beta = b + 1.0;
    const double mean = alpha / (alpha + beta);
    const double log_norm = std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta) + std::log(alpha);
    auto step = [&](double p) {
      if (p <= 0.0 || p >= 1.0) return 0.0;
      return std::exp(alpha * std::log(p) + beta * std::log1p(-p) - log_norm);
    };
    double mass = 0.0;
    double upper = 0.0;  // mass of Beta(alpha + 1, beta) over [p0, p1]
    if (p0 >= mean) {
      // Upper tail: difference of complements avoids cancellation.
      mass = boost::math::ibetac(alpha, beta, p0) - boost::math::ibetac(alpha, beta, p1);
      upper = mass + step(p0) - step(p1);
    } else {
      mass = boost::math::ibeta(alpha, beta, p1) - boost::math::ibeta(alpha, beta, p0);
      upper = mass - (step(p1) - step(p0));
    }
    return {mass, lo * mass + (hi - lo) * mean * std::max(upper, 0.0)};
  }
};

}  // namespace detail

/// Posterior mean of the Bloch vector conditioned on the unit ball.
///
/// The three axis posteriors are independent beta densities, so the
/// conditioned integral is iterated: Gauss-Legendre over the first two
/// components (each clipped to the disk cross-section) and an exact
/// incomplete-beta integral over the third. The outer rules only cover the
/// region where the density is within exp(-40) of the best point in the ball.
/// Throws IntegrationError when the conditioned normalizer underflows.
inline RawEstimate bayes_conditioned(const CountStatistics& c, const PriorParams& prior,
                                     const IntegratorConfig& cfg = {}) {
  if (c.n == 0) throw std::invalid_argument("Bayesian estimate needs n >= 1");
  cfg.validate();
  const bool bloch = cfg.domain == ConditioningDomain::BlochBall;

  std::array<detail::AxisPosterior, 3> axes;
  for (std::size_t i = 0; i < 3; ++i) {
    auto& ax = axes[i];
    ax.a = static_cast<double>(c.plus[i]) + prior.lambda;
    ax.b = static_cast<double>(c.n - c.plus[i]) + prior.kappa - prior.lambda;
    ax.lo = bloch ? -1.0 : 0.0;
    ax.hi = 1.0;
  }

  // How far below the unconstrained maximum the best point of the ball lies.
  // The radial projection of the mode is feasible, which bounds it from above.
  double deficit = 0.0;
  {
    BlochVector mode;
    for (std::size_t i = 0; i < 3; ++i) mode[i] = axes[i].to_x(axes[i].mode_p());
    const double len = mode.norm();
    if (len > 1.0) {
      for (std::size_t i = 0; i < 3; ++i) {
        deficit += axes[i].log_density(axes[i].mode_p()) - axes[i].log_density(axes[i].to_p(mode[i] / len));
      }
    }
    if (!std::isfinite(deficit)) deficit = std::numeric_limits<double>::infinity();
  }
  constexpr double kDepth = 40.0;
  std::array<std::array<double, 2>, 2> win;
  for (std::size_t i = 0; i < 2; ++i) {
    win[i] = std::isfinite(deficit) ? axes[i].window(kDepth + deficit) : std::array<double, 2>{axes[i].lo, axes[i].hi};
  }
  const std::array<double, 2> peak{axes[0].log_density(axes[0].mode_p()), axes[1].log_density(axes[1].mode_p())};

  const auto rule = gauss_legendre(cfg.grid_points_per_axis);
  const std::size_t k = rule.nodes.size();

  double z = 0.0;
  std::array<double, 3> moment{0.0, 0.0, 0.0};
  const double h1 = 0.5 * (win[0][1] - win[0][0]);
  const double c1 = 0.5 * (win[0][1] + win[0][0]);
  for (std::size_t i = 0; i < k; ++i) {
    const double x1 = c1 + h1 * rule.nodes[i];
    const double w1 = h1 * rule.weights[i] * std::exp(axes[0].log_density(axes[0].to_p(x1)) - peak[0]);
    if (w1 == 0.0) continue;
    const double disk = std::sqrt(std::max(0.0, 1.0 - x1 * x1));
    const double lo2 = std::max(win[1][0], -disk);
    const double hi2 = std::min(win[1][1], disk);
    if (!(hi2 > lo2)) continue;
    const double h2 = 0.5 * (hi2 - lo2);
    const double c2 = 0.5 * (hi2 + lo2);
    double row_z = 0.0, row_m1 = 0.0, row_m2 = 0.0, row_m3 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double x2 = c2 + h2 * rule.nodes[j];
      const double w2 = h2 * rule.weights[j] * std::exp(axes[1].log_density(axes[1].to_p(x2)) - peak[1]);
      if (w2 == 0.0) continue;
      const double r = std::sqrt(std::max(0.0, 1.0 - x1 * x1 - x2 * x2));
      const auto [mass, m3] = axes[2].mass_and_moment(std::max(axes[2].lo, -r), std::min(axes[2].hi, r));
      row_z += w2 * mass;
      row_m2 += w2 * mass * x2;
      row_m3 += w2 * m3;
    }
    row_m1 = row_z * x1;
    z += w1 * row_z;
    moment[0] += w1 * row_m1;
    moment[1] += w1 * row_m2;
    moment[2] += w1 * row_m3;
  }
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw IntegrationError("conditioned posterior normalizer underflowed (n=" + std::to_string(c.n) + ")");
  }
  BlochVector s;
  for (std::size_t i = 0; i < 3; ++i) {
    const double x = moment[i] / z;
    s[i] = bloch ? x : 2.0 * x - 1.0;
  }
  return {Method::BayesConditioned, s, s.is_physical()};
}

inline RawEstimate bayes_conditioned(const MeasurementDataSet& d, const PriorParams& prior,
                                     const IntegratorConfig& cfg = {}) {
  return bayes_conditioned(d.counts(), prior, cfg);
}

/// All three estimates for one data set, in kMethods order.
inline std::array<RawEstimate, 3> estimate_all(const CountStatistics& c, const PriorParams& prior,
                                               const IntegratorConfig& cfg = {}) {
  return {ls_estimate(c), bayes_unconditioned(c, prior), bayes_conditioned(c, prior, cfg)};
}

}  // namespace qtomo
