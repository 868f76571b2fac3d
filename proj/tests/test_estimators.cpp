#include <cmath>
#include <random>

#include "gtest/gtest.h"

#include "oracles.hpp"
#include "qtomo/estimators.hpp"

using namespace qtomo;

namespace {

CountStatistics counts(std::uint64_t n, std::uint64_t l1, std::uint64_t l2, std::uint64_t l3) {
  return CountStatistics(n, {l1, l2, l3});
}

double ls_loss(const BlochVector& s, const BlochVector& pi) { return (s - pi).norm_squared(); }

}  // namespace

TEST(ls_relative_frequencies, examples) {
  EXPECT_EQ(ls_relative_frequencies(counts(10, 10, 10, 10)), BlochVector(1, 1, 1));
  EXPECT_EQ(ls_relative_frequencies(counts(10, 5, 5, 5)), BlochVector(0, 0, 0));
  const BlochVector pi = ls_relative_frequencies(counts(10, 8, 3, 6));
  EXPECT_DOUBLE_EQ(pi[0], 0.6);
  EXPECT_DOUBLE_EQ(pi[1], -0.4);
  EXPECT_DOUBLE_EQ(pi[2], 0.2);
}

TEST(ls_estimate, interior_point_unchanged) {
  const auto c = counts(10, 6, 3, 6);  // pi = (0.2, -0.4, 0.2)
  EXPECT_EQ(ls_estimate(c).vector, ls_relative_frequencies(c));
  const auto mixed = ls_estimate(counts(1000, 650, 300, 650));
  EXPECT_NEAR(mixed.vector[0], 0.3, 1e-15);
  EXPECT_NEAR(mixed.vector[1], -0.4, 1e-15);
  EXPECT_TRUE(mixed.physical);
}

TEST(ls_estimate, projects_corner_to_reference_direction) {
  const RawEstimate e = ls_estimate(counts(10, 10, 10, 10));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(e.vector[i], 0.5774, 5e-5);
    EXPECT_NEAR(e.vector[i], pure_reference_state()[i], 1e-15);
  }
  EXPECT_TRUE(e.physical);
  EXPECT_TRUE(e.vector.is_pure());
}

TEST(ls_estimate, projection_is_exact_and_satisfies_kkt) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::uint64_t> pick(0, 200);
  int projected = 0;
  for (int k = 0; k < 2000; ++k) {
    const auto c = counts(200, pick(rng), pick(rng), pick(rng));
    const BlochVector pi = ls_relative_frequencies(c);
    const BlochVector s = ls_estimate(c).vector;
    if (pi.norm() <= 1.0) {
      EXPECT_EQ(s, pi);
      continue;
    }
    ++projected;
    const double len = pi.norm();
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(s[i], pi[i] / len);
    // Stationarity: pi - s = mu s with mu >= 0, and |s| = 1.
    const BlochVector g = pi - s;
    EXPECT_NEAR(std::abs(s.norm() - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(g[1] * s[2] - g[2] * s[1], 0.0, 1e-12);
    EXPECT_NEAR(g[2] * s[0] - g[0] * s[2], 0.0, 1e-12);
    EXPECT_NEAR(g[0] * s[1] - g[1] * s[0], 0.0, 1e-12);
    EXPECT_GE(g.dot(s), 0.0);
  }
  EXPECT_GT(projected, 500);
}

TEST(ls_estimate, brute_force_optimality) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<std::uint64_t> pick(0, 1000);
  int checked = 0;
  while (checked < 1000) {
    const auto c = counts(1000, pick(rng), pick(rng), pick(rng));
    const BlochVector pi = ls_relative_frequencies(c);
    if (pi.norm() <= 1.0) continue;
    ++checked;
    const double best = ls_loss(ls_estimate(c).vector, pi);
    for (int t = 0; t < 1000; ++t) {
      const BlochVector x = oracle::random_ball_point(rng);
      ASSERT_LE(best, ls_loss(x, pi) + 1e-12);
    }
  }
}

TEST(bayes_posterior, closed_form_examples) {
  const PriorParams flat;
  EXPECT_EQ(bayes_posterior_mean(0, 0, flat), 0.5);
  EXPECT_DOUBLE_EQ(bayes_posterior_variance(0, 0, flat), 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(bayes_posterior_mean(6, 10, flat), 7.0 / 12.0);
  EXPECT_DOUBLE_EQ(bayes_posterior_variance(6, 10, flat), 35.0 / 1872.0);
  EXPECT_NEAR(bayes_posterior_variance(6, 10, flat), 0.018697, 5e-7);
  const auto q = oracle::posterior_moments_by_quadrature(6, 10, 0, 0);
  EXPECT_NEAR(bayes_posterior_mean(6, 10, flat), q[0], 1e-10);
  EXPECT_NEAR(bayes_posterior_variance(6, 10, flat), q[1], 1e-10);
}

TEST(bayes_posterior, rejects_bad_counts) {
  EXPECT_THROW(bayes_posterior_mean(11, 10, {}), std::invalid_argument);
  EXPECT_THROW(bayes_posterior_variance(11, 10, {}), std::invalid_argument);
  EXPECT_THROW(bayes_posterior_mean(-1, 10, {}), std::invalid_argument);
  EXPECT_THROW(PriorParams(-1, 0), std::invalid_argument);
  EXPECT_THROW(PriorParams(1, 2), std::invalid_argument);
  EXPECT_THROW(PriorParams(1, -0.5), std::invalid_argument);
}

TEST(bayes_posterior, matches_quadrature_on_sampled_grid) {
  const std::array<PriorParams, 3> priors{PriorParams(0, 0), PriorParams(2, 1), PriorParams(5, 0.5)};
  for (int n = 0; n <= 200; n += (n < 20 ? 1 : 13)) {
    for (int l = 0; l <= n; l += (n < 20 ? 1 : 7)) {
      for (const auto& pr : priors) {
        const auto q = oracle::posterior_moments_by_quadrature(l, n, pr.kappa, pr.lambda);
        ASSERT_NEAR(bayes_posterior_mean(l, n, pr), q[0], 1e-9) << l << "/" << n;
        ASSERT_NEAR(bayes_posterior_variance(l, n, pr), q[1], 1e-9) << l << "/" << n;
      }
    }
  }
}

TEST(bayes_posterior, mean_strictly_increasing_and_variance_shrinks) {
  for (const PriorParams pr : {PriorParams(0, 0), PriorParams(3, 2)}) {
    for (int n : {1, 10, 100}) {
      for (int l = 0; l < n; ++l) EXPECT_LT(bayes_posterior_mean(l, n, pr), bayes_posterior_mean(l + 1, n, pr));
    }
  }
  // Fixed l/n: variance scales like 1/n.
  const double r = bayes_posterior_variance(450, 900, {}) / bayes_posterior_variance(50, 100, {});
  EXPECT_NEAR(r, 1.0 / 9.0, 0.01);
}

TEST(bayes_unconditioned, symmetric_counts_give_origin) {
  for (std::uint64_t n : {2u, 10u, 100u}) {
    const auto e = bayes_unconditioned(counts(n, n / 2, n / 2, n / 2), {});
    EXPECT_EQ(e.vector, BlochVector(0, 0, 0));
    EXPECT_TRUE(e.physical);
  }
}

TEST(bayes_unconditioned, all_plus_leaves_the_ball) {
  const auto e = bayes_unconditioned(counts(10, 10, 10, 10), {});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(e.vector[i], 5.0 / 6.0);
  EXPECT_NEAR(e.vector.norm(), 1.443, 5e-4);
  EXPECT_FALSE(e.physical);
}

TEST(bayes_unconditioned, consistent_at_large_n) {
  const BlochVector s{0.3, -0.4, 0.3};
  const auto d = simulate_dataset(s, 1000000, {5, 0});
  const auto e = bayes_unconditioned(d, {2, 1});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(e.vector[i], s[i], 0.01);
}

TEST(gauss_legendre, integrates_polynomials_exactly) {
  const auto r = gauss_legendre(32);
  for (int deg = 0; deg <= 63; ++deg) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) sum += r.weights[i] * std::pow(r.nodes[i], deg);
    const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
    EXPECT_NEAR(sum, exact, 1e-14) << "degree " << deg;
  }
  for (std::size_t i = 0; i < r.nodes.size(); ++i) EXPECT_EQ(r.nodes[i], -r.nodes[r.nodes.size() - 1 - i]);
}

TEST(bayes_conditioned, symmetric_counts_give_origin) {
  for (std::uint64_t n : {2u, 20u, 200u}) {
    const auto e = bayes_conditioned(counts(n, n / 2, n / 2, n / 2), {});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(e.vector[i], 0.0, 1e-10);
  }
}

TEST(bayes_conditioned, all_plus_stays_inside_ball) {
  for (std::uint64_t n : {1u, 10u, 100u, 900u}) {
    const auto e = bayes_conditioned(counts(n, n, n, n), {});
    EXPECT_LT(e.vector.norm(), 1.0) << n;
    EXPECT_TRUE(e.physical);
    // At n = 1 the unconditioned estimate is (1/3, 1/3, 1/3), still inside.
    if (n >= 10) {
      EXPECT_FALSE(bayes_unconditioned(counts(n, n, n, n), {}).physical);
    }
  }
}

TEST(bayes_conditioned, matches_rejection_oracle) {
  const auto e = bayes_conditioned(counts(20, 16, 6, 13), {});
  const auto mc = oracle::conditioned_mean_by_rejection(20, {16, 6, 13}, 0, 0, 1000000, 77);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(e.vector[i], mc.mean[i], 3.0 * mc.std_error[i]);
}

TEST(bayes_conditioned, matches_rejection_oracle_with_prior) {
  const auto e = bayes_conditioned(counts(30, 25, 4, 20), {4, 1});
  const auto mc = oracle::conditioned_mean_by_rejection(30, {25, 4, 20}, 4, 1, 1000000, 78);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(e.vector[i], mc.mean[i], 3.0 * mc.std_error[i]);
}

TEST(bayes_conditioned, grid_convergence) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> pick_n(0, 3);
  const std::array<std::uint64_t, 4> ns{10, 50, 200, 900};
  IntegratorConfig coarse, fine;
  fine.grid_points_per_axis = 256;
  for (int k = 0; k < 50; ++k) {
    const std::uint64_t n = ns[pick_n(rng)];
    // Mix interior states and states near the sphere.
    BlochVector s = k % 2 ? oracle::random_ball_point(rng) : oracle::random_sphere_point(rng);
    const auto d = simulate_dataset(s, n, {31, static_cast<std::uint64_t>(k)});
    const auto a = bayes_conditioned(d, {}, coarse);
    const auto b = bayes_conditioned(d, {}, fine);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a.vector[i], b.vector[i], 1e-4) << "n=" << n;
  }
}

TEST(bayes_conditioned, negligible_effect_inside_ball_at_large_n) {
  std::mt19937_64 rng(32);
  int checked = 0;
  for (int k = 0; checked < 30; ++k) {
    const BlochVector s = 0.7 * oracle::random_ball_point(rng);
    const std::uint64_t n = 100 + 100 * (k % 5);
    const auto d = simulate_dataset(s, n, {32, static_cast<std::uint64_t>(k)});
    const auto u = bayes_unconditioned(d, {});
    if (u.vector.norm() > 0.8) continue;
    ++checked;
    const auto c = bayes_conditioned(d, {});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::abs(c.vector[i] - u.vector[i]), 0.01);
  }
}

TEST(bayes_conditioned, always_strictly_inside_ball) {
  std::mt19937_64 rng(33);
  for (int k = 0; k < 40; ++k) {
    const BlochVector s = oracle::random_sphere_point(rng);
    const auto d = simulate_dataset(s, 5 + 40 * k, {33, static_cast<std::uint64_t>(k)});
    EXPECT_LT(bayes_conditioned(d, {}).vector.norm(), 1.0);
  }
}

TEST(bayes_conditioned, deterministic) {
  const auto c = counts(77, 60, 20, 41);
  EXPECT_EQ(bayes_conditioned(c, {}).vector, bayes_conditioned(c, {}).vector);
}

TEST(bayes_conditioned, u_ball_domain) {
  IntegratorConfig cfg;
  cfg.domain = ConditioningDomain::UBall;
  // With u = (1 + s)/2 restricted to |u| <= 1 the estimate is pushed toward
  // negative components. A small data set keeps the constraint active.
  const auto c = counts(4, 2, 2, 2);
  const auto e = bayes_conditioned(c, {}, cfg);
  // Rejection reference in u-space.
  std::mt19937_64 rng(34);
  std::gamma_distribution<double> g(3.0);
  double sum = 0.0;
  std::uint64_t acc = 0;
  for (int k = 0; k < 400000; ++k) {
    std::array<double, 3> u{};
    double r2 = 0.0;
    for (auto& x : u) {
      const double a = g(rng), b = g(rng);
      x = a / (a + b);
      r2 += x * x;
    }
    if (r2 > 1.0) continue;
    ++acc;
    sum += 2.0 * u[0] - 1.0;
  }
  const double ref = sum / acc;
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(e.vector[i], ref, 0.005);
  EXPECT_LT(e.vector[0], -0.05);
}

TEST(bayes_conditioned, config_validation) {
  IntegratorConfig odd;
  odd.grid_points_per_axis = 33;
  EXPECT_THROW(bayes_conditioned(counts(10, 5, 5, 5), {}, odd), std::invalid_argument);
  IntegratorConfig small;
  small.grid_points_per_axis = 16;
  EXPECT_THROW(bayes_conditioned(counts(10, 5, 5, 5), {}, small), std::invalid_argument);
}

TEST(estimate_all, order_and_methods) {
  const auto r = estimate_all(counts(20, 16, 6, 13), {});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r[i].method, kMethods[i]);
  EXPECT_EQ(to_string(Method::BayesConditioned), "BayesConditioned");
}
