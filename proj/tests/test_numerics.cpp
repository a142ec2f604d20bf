#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nhces/numerics.hpp"
#include "nhces/rng.hpp"

namespace nhces {
namespace {

TEST(LogSumExp, MatchesDirectSumAndSurvivesLargeArguments) {
  std::vector<double> x{0.1, -2.0, 3.5};
  EXPECT_NEAR(numerics::log_sum_exp(x), std::log(std::exp(0.1) + std::exp(-2.0) + std::exp(3.5)), 1e-14);
  std::vector<double> big{1000.0, 1000.0};
  EXPECT_NEAR(numerics::log_sum_exp(big), 1000.0 + std::log(2.0), 1e-12);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (std::size_t n : {1u, 2u, 5u, 16u, 101u}) {
    const numerics::GaussLegendre rule(n);
    double sum_w = 0.0;
    double sum_x2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_w += rule.weights[i];
      sum_x2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
    }
    EXPECT_NEAR(sum_w, 2.0, 1e-13) << n;
    if (n >= 2) {
      EXPECT_NEAR(sum_x2, 2.0 / 3.0, 1e-13) << n;
    }
  }
}

TEST(GaussLegendre, LargeRuleIntegratesSmoothFunction) {
  const numerics::GaussLegendre rule(2000);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::exp(rule.nodes[i]);
  EXPECT_NEAR(s, std::exp(1.0) - std::exp(-1.0), 1e-12);
}

TEST(NewtonBisect, FindsRootsWithBadDerivatives) {
  auto f = [](double x) { return std::atan(x - 0.3); };
  auto fdf = [](double x) { return std::pair{std::atan(x - 0.3), 1.0 / (1.0 + (x - 0.3) * (x - 0.3))}; };
  const auto b = numerics::expand_bracket(f, 10.0, 1.0, 60, "test");
  const auto r = numerics::newton_bisect(fdf, b);
  EXPECT_NEAR(r.x, 0.3, 1e-14);
}

TEST(NewtonBisect, ExpandBracketFailsOnRootlessFunction) {
  auto f = [](double x) { return 1.0 + x * x; };
  EXPECT_THROW(numerics::expand_bracket(f, 0.0, 1.0, 20, "test"), NumericalError);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  Rng c(43);
  EXPECT_NE(Rng(42).next(), c.next());
}

TEST(Rng, GammaMomentsForShapesAboveAndBelowOne) {
  for (double shape : {0.4, 1.0, 2.5}) {
    Rng rng(7);
    const int n = 400000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.gamma(shape);
      ASSERT_GT(x, 0.0);
      s += x;
      s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    EXPECT_NEAR(mean, shape, 4.0 * std::sqrt(shape / n)) << shape;
    EXPECT_NEAR(var, shape, 0.02 * shape + 4.0 * std::sqrt(2.0 * shape * shape / n)) << shape;
  }
}

TEST(Rng, GumbelMeanIsEulerMascheroni) {
  Rng rng(11);
  const int n = 1000000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += rng.gumbel();
  const double se = M_PI / std::sqrt(6.0) / std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(s / n, 0.5772156649015329, 4.0 * se);
}

}  // namespace
}  // namespace nhces
