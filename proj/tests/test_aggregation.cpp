#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "nhces/aggregation.hpp"
#include "test_oracles.hpp"

namespace nhces {
namespace {

ClosedFormEconomy economy(double rho, double alpha, double xi_diff = 0.0, double M = 1.0) {
  PreferenceParams p;
  p.rho = rho;
  p.alpha = alpha;
  p.xi_p = xi_diff;
  return ClosedFormEconomy(p, M);
}

// Household share integrated directly against the Amoroso density in E,
// independent of the transformed-variable route used by the library.
double direct_integral(const AggregateEconomy& agg, double eps, double omega, double p) {
  const auto& d = agg.exp_dist();
  auto f = [&](double e) {
    if (!(e > 0.0)) return 0.0;
    return household_share(agg.econ(), eps, omega, p, e) * amoroso_pdf(d, e);
  };
  return testing::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
}

TEST(AggregateEconomy, EnforcesCoupledShape) {
  const auto econ = economy(2.0, 1.0);
  EXPECT_THROW(AggregateEconomy(econ, AmorosoParams{0, 1, 2, 2.0}), ParameterError);
  EXPECT_THROW(AggregateEconomy(econ, AmorosoParams{0.5, 1, 2, 1.0}), ParameterError);
  EXPECT_NO_THROW(AggregateEconomy(econ, AmorosoParams{0, 1, 2, 1.0}));
  EXPECT_DOUBLE_EQ(AggregateEconomy::coupled(economy(0.5, 2.0), 1.0, 3.0).exp_dist().n, -0.25);
}

TEST(AggregateShare, FormulaForcedUnit) {
  const auto agg = AggregateEconomy::coupled(economy(2.0, 1.0), 1.0, 1.0);
  EXPECT_NEAR(aggregate_share(agg, 0.0, 1.7, 1.7), 1.0, 1e-15);
}

TEST(AggregateShare, MatchesQuadratureInBothRegimes) {
  const std::vector<AggregateEconomy> cases{
      AggregateEconomy::coupled(economy(2.0, 1.0), 1.0, 2.0),
      AggregateEconomy::coupled(economy(0.5, 2.0, 0.3, 1.2), 1.5, 6.0),
      AggregateEconomy::coupled(economy(3.0, 1.5), 0.8, 0.7),
      AggregateEconomy::coupled(economy(0.4, 1.0, -0.2), 2.0, 4.0),
  };
  for (const auto& agg : cases) {
    for (double eps : {0.0, 0.5, 1.0, 2.0}) {
      const double exact = aggregate_share(agg, eps, 1.1, 0.9);
      EXPECT_NEAR(quadrature_aggregate_share(agg, eps, 1.1, 0.9) / exact, 1.0, 1e-8);
      EXPECT_NEAR(direct_integral(agg, eps, 1.1, 0.9) / exact, 1.0, 1e-8);
    }
  }
}

TEST(AggregateShare, MonteCarloWithinFourStandardErrors) {
  const auto agg = AggregateEconomy::coupled(economy(2.0, 1.0), 1.0, 2.0);
  for (double eps : {0.5, 1.0, 2.0}) {
    const auto mc = mc_aggregate_share(agg, eps, 1.0, 1.0, 1000000, 31);
    EXPECT_GT(mc.std_error, 0.0);
    EXPECT_NEAR(mc.mean, aggregate_share(agg, eps, 1.0, 1.0), 4.0 * mc.std_error) << eps;
    EXPECT_GT(mc.expenditure_weighted, 0.0);
  }
}

TEST(AggregateShare, StandardErrorScalesWithDraws) {
  const auto agg = AggregateEconomy::coupled(economy(2.0, 1.0), 1.0, 2.0);
  const auto a = mc_aggregate_share(agg, 1.0, 1.0, 1.0, 200000, 2);
  const auto b = mc_aggregate_share(agg, 1.0, 1.0, 1.0, 400000, 2);
  EXPECT_NEAR(a.std_error / b.std_error, std::sqrt(2.0), 0.1 * std::sqrt(2.0));
  EXPECT_THROW(mc_aggregate_share(agg, 1.0, 1.0, 1.0, 999, 2), ParameterError);
}

TEST(AggregateShare, MeanFormIdentityAndExistence) {
  for (const auto& agg : {AggregateEconomy::coupled(economy(2.0, 1.0), 1.0, 2.0),
                          AggregateEconomy::coupled(economy(0.5, 2.0, 0.3), 1.5, 6.0),
                          AggregateEconomy::coupled(economy(3.0, 2.0), 0.5, 1.5)}) {
    for (double eps : {0.0, 0.7, 3.0}) {
      EXPECT_NEAR(aggregate_share_mean_form(agg, eps, 0.8, 1.3) / aggregate_share(agg, eps, 0.8, 1.3), 1.0, 1e-12);
    }
  }
  // rho - 1 = alpha: the mean is the gamma mean k m.
  EXPECT_NEAR(AggregateEconomy::coupled(economy(2.0, 1.0), 1.5, 3.0).mean_expenditure(), 4.5, 1e-13);
  EXPECT_NO_THROW(AggregateEconomy::coupled(economy(0.5, 1.0), 1.0, 3.0).mean_expenditure());
  const auto no_mean = AggregateEconomy::coupled(economy(0.5, 1.0), 1.0, 1.5);
  EXPECT_FALSE(no_mean.mean_exists());
  EXPECT_THROW(aggregate_share_mean_form(no_mean, 1.0, 1.0, 1.0), ParameterError);
  EXPECT_THROW(aggregate_share_approx(no_mean, 1.0, 1.0, 1.0), ParameterError);
}

TEST(AggregateShareApprox, AccuracyGrowsWithM) {
  const auto big = AggregateEconomy::coupled(economy(2.0, 1.0), 1.0, 50.0);
  for (double eps : {0.5, 1.0, 2.0}) EXPECT_LT(aggregate_share_approx(big, eps, 1.0, 1.0).relative_deviation, 0.01);
  const auto big3 = AggregateEconomy::coupled(economy(3.0, 1.0), 1.0, 50.0);
  EXPECT_LT(aggregate_share_approx(big3, 1.0, 1.0, 1.0).relative_deviation, 0.01);

  const auto small = AggregateEconomy::coupled(economy(3.0, 1.0), 1.0, 1.0);
  const auto r = aggregate_share_approx(small, 1.0, 1.0, 1.0);
  EXPECT_GT(r.relative_deviation, aggregate_share_approx(big3, 1.0, 1.0, 1.0).relative_deviation);
  EXPECT_NEAR(r.relative_deviation, std::abs(r.approx - r.exact) / r.exact, 1e-15);

  // At eps = 0 only the gamma-ratio substitution separates the two forms.
  const auto mid = AggregateEconomy::coupled(economy(3.0, 1.0), 1.0, 4.0);
  const auto r0 = aggregate_share_approx(mid, 0.0, 1.0, 1.0);
  const double mean_ratio = gamma_ratio_approx(4.0, 0.5).exact;
  EXPECT_NEAR(r0.approx / r0.exact, mean_ratio * mean_ratio / 4.0, 1e-13);
}

TEST(AggregateShare, GoodsLevelAddingUp) {
  PreferenceParams p;
  p.rho = 2.0;
  p.alpha = 1.0;
  p.xi_p = 0.2;
  const ClosedFormEconomy econ(p);
  const auto agg = AggregateEconomy::coupled(econ, 1.0, 8.0);
  QuadratureOptions opts;
  opts.scale_multiplier = 8.0;
  const auto grid = quadrature_goods_grid(p, 2000, opts);
  double total = 0.0;
  for (const auto& g : grid) total += g.weight * aggregate_share(agg, g.epsilon, g.omega, g.price);
  EXPECT_NEAR(total, 1.0, 1e-5);
}

TEST(AggregateShare, DependsOnDispersionAtFixedMean) {
  const auto econ = economy(2.0, 1.0);
  const double target_mean = 2.0;
  auto share_at = [&](double m) {
    // k chosen so that the mean expenditure stays at target_mean.
    const double k = target_mean * std::exp(std::lgamma(m) - std::lgamma(m + 1.0));
    const auto agg = AggregateEconomy::coupled(econ, k, m);
    EXPECT_NEAR(agg.mean_expenditure(), target_mean, 1e-12);
    return aggregate_share(agg, 1.0, 1.0, 1.0);
  };
  const double h = 1e-4;
  const double deriv = (share_at(3.0 + h) - share_at(3.0 - h)) / (2.0 * h);
  EXPECT_GT(std::abs(deriv), 1e-4);
  // eps = 0 shares do not react to dispersion in this rho - 1 = alpha case.
  const double k1 = target_mean / 3.0;
  const double k2 = target_mean / 5.0;
  EXPECT_NEAR(aggregate_share(AggregateEconomy::coupled(econ, k1, 3.0), 0.0, 1.0, 1.0),
              aggregate_share(AggregateEconomy::coupled(econ, k2, 5.0), 0.0, 1.0, 1.0), 1e-12);
}

}  // namespace
}  // namespace nhces
