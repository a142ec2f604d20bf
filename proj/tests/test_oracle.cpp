#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nhces/closedform.hpp"
#include "nhces/oracle.hpp"
#include "test_oracles.hpp"

namespace nhces {
namespace {

GoodsGrid uniform_grid(const std::vector<double>& eps, double omega = 1.0, double price = 1.0) {
  std::vector<Good> goods;
  for (double e : eps) goods.push_back({e, omega, price, 1.0 / static_cast<double>(eps.size())});
  return GoodsGrid(std::move(goods));
}

GoodsGrid mixed_grid() {
  return GoodsGrid({{0.2, 1.3, 0.7, 0.1}, {1.0, 0.8, 1.1, 0.25}, {2.5, 1.0, 1.9, 0.4}, {4.0, 0.6, 0.9, 0.25}});
}

TEST(ExpenditureOfUtility, HomotheticCases) {
  const auto zero = uniform_grid({0.0, 0.0, 0.0});
  for (double u : {0.1, 1.0, 50.0}) EXPECT_NEAR(oracle::expenditure_of_utility(zero, 0.5, u), 1.0, 1e-14);

  const GoodsGrid ones({{1.0, 2.0, 1.5, 0.5}, {1.0, 0.5, 3.0, 0.5}});
  for (double rho : {0.5, 3.0}) {
    const double index = std::pow(0.5 * std::pow(1.5 / 2.0, 1.0 - rho) + 0.5 * std::pow(3.0 / 0.5, 1.0 - rho),
                                  1.0 / (1.0 - rho));
    for (double u : {0.2, 1.0, 7.0}) {
      EXPECT_NEAR(oracle::expenditure_of_utility(ones, rho, u) / (u * index), 1.0, 1e-13);
    }
  }
}

TEST(ExpenditureOfUtility, OverflowIsReported) {
  const auto grid = uniform_grid({0.0, 400.0});
  EXPECT_THROW(oracle::expenditure_of_utility(grid, 0.5, 1e10), NumericalError);
}

TEST(ExpenditureOfUtility, StrictlyIncreasingInUtility) {
  const auto grid = mixed_grid();
  for (double rho : {0.4, 2.5}) {
    double prev = 0.0;
    for (int k = -20; k <= 20; ++k) {
      const double e = oracle::expenditure_of_utility(grid, rho, std::pow(10.0, 0.1 * k));
      EXPECT_GT(e, prev);
      prev = e;
    }
  }
}

TEST(UtilityOfExpenditure, RoundTrip) {
  const auto grid = mixed_grid();
  for (double rho : {0.5, 2.0}) {
    for (double u : {0.1, 1.0, 10.0}) {
      const double e = oracle::expenditure_of_utility(grid, rho, u);
      EXPECT_NEAR(oracle::utility_of_expenditure(grid, rho, e) / u, 1.0, 1e-10);
      const double back = oracle::expenditure_of_utility(grid, rho, oracle::utility_of_expenditure(grid, rho, e));
      EXPECT_LE(std::abs(back - e) / e, 1e-12);
    }
  }
}

TEST(UtilityOfExpenditure, HomotheticUnitIndex) {
  const auto grid = uniform_grid({1.0, 1.0});
  for (double e : {0.3, 1.0, 4.0}) EXPECT_NEAR(oracle::utility_of_expenditure(grid, 0.5, e), e, 1e-14 * e);
}

TEST(UtilityOfExpenditure, MatchesStandaloneBisection) {
  // Three goods, eps = (0, 1, 2), unit prices and tastes, rho = 1/2, E = 1:
  // 1 = [ (1 + u + u^2)/3 ]^2, solved by plain bisection.
  const auto grid = uniform_grid({0.0, 1.0, 2.0});
  auto f = [](double u) { return std::pow((1.0 + std::sqrt(u) + u) / 3.0, 2.0) - 1.0; };
  const double expected = testing::bisect(f, 0.01, 10.0, 1e-15);
  EXPECT_NEAR(oracle::utility_of_expenditure(grid, 0.5, 1.0), expected, 1e-12);
}

TEST(UtilityOfExpenditure, FlatExpenditureFunctionFailsToBracket) {
  const auto grid = uniform_grid({0.0, 0.0});
  EXPECT_THROW(oracle::utility_of_expenditure(grid, 0.5, 2.0), NumericalError);
  EXPECT_THROW(oracle::utility_of_expenditure(grid, 0.5, -1.0), ParameterError);
}

TEST(Demand, BudgetAddingUpAndShareSum) {
  const auto grid = mixed_grid();
  for (double rho : {0.3, 0.5, 2.0, 4.0}) {
    for (double e : {0.05, 1.0, 20.0}) {
      const auto d = oracle::demand(grid, rho, e);
      double spend = 0.0;
      double share_sum = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_GT(d.quantities[i], 0.0);
        spend += grid[i].weight * grid[i].price * d.quantities[i];
        share_sum += d.shares[i];
        EXPECT_NEAR(d.shares[i], grid[i].weight * grid[i].price * d.quantities[i] / e, 1e-12);
      }
      EXPECT_NEAR(spend / e, 1.0, 1e-9);
      EXPECT_NEAR(share_sum, 1.0, 1e-12);
    }
  }
}

TEST(Demand, SymmetryAndHomotheticity) {
  const auto same = uniform_grid({1.5, 1.5, 1.5, 1.5});
  const auto d = oracle::demand(same, 0.7, 3.0);
  for (double s : d.shares) EXPECT_NEAR(s, 0.25, 1e-15);

  const GoodsGrid ones({{1.0, 2.0, 1.5, 0.3}, {1.0, 0.5, 3.0, 0.7}});
  const auto lo = oracle::demand(ones, 0.5, 0.5);
  const auto hi = oracle::demand(ones, 0.5, 8.0);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(lo.shares[i], hi.shares[i], 1e-13);
}

TEST(Demand, ComplementsLuxuryShareRisesWithExpenditure) {
  const auto grid = uniform_grid({0.0, 2.0});
  double prev = 0.0;
  for (double e : {0.5, 1.0, 2.0}) {
    const double s = oracle::demand(grid, 0.5, e).shares[1];
    EXPECT_GT(s, prev);
    prev = s;
  }
}

TEST(ElasticityFd, HomotheticAndEngelAggregation) {
  const auto ones = uniform_grid({1.0, 1.0, 1.0});
  for (double eta : oracle::expenditure_elasticity_fd(ones, 0.5, 2.0)) EXPECT_NEAR(eta, 1.0, 1e-6);

  const auto grid = mixed_grid();
  for (double rho : {0.5, 2.0}) {
    for (double e : {0.3, 1.0, 5.0}) {
      const auto eta = oracle::expenditure_elasticity_fd(grid, rho, e);
      const auto d = oracle::demand(grid, rho, e);
      double engel = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) engel += d.shares[i] * eta[i];
      EXPECT_NEAR(engel, 1.0, 1e-6);
    }
  }
  EXPECT_THROW(oracle::expenditure_elasticity_fd(grid, 0.5, 1.0, 1e-2), ParameterError);
}

TEST(ElasticityFd, MarginalUtilityOfExpenditureIsInverseEpsBar) {
  const auto grid = mixed_grid();
  for (double rho : {0.5, 2.0}) {
    const double e = 1.7;
    const double h = 1e-6;
    const double du = (oracle::utility_of_expenditure(grid, rho, e * (1 + h)) -
                       oracle::utility_of_expenditure(grid, rho, e * (1 - h))) /
                      (2.0 * h * e);
    const auto d = oracle::demand(grid, rho, e);
    EXPECT_NEAR(du * e * d.eps_bar / d.utility, 1.0, 1e-6);
  }
}

TEST(Oracle, MatchesClosedFormOnQuadratureGrid) {
  PreferenceParams p;
  p.rho = 0.5;
  p.alpha = 2.0;
  p.xi_p = 0.3;
  const ClosedFormEconomy econ(p);
  QuadratureOptions opts;
  opts.scale_multiplier = tilted_gamma_scale(econ, 4.0) / p.beta;
  const auto grid = quadrature_goods_grid(p, 2000, opts);
  for (double e : {0.25, 1.0, 4.0}) {
    const double log_u = oracle::log_utility_of_expenditure(grid, p.rho, e);
    EXPECT_NEAR(log_u, log_utility_of_expenditure(econ, e), 1e-8);
    const double e_back = std::exp(oracle::log_expenditure_of_log_utility(grid, p.rho, log_utility_of_expenditure(econ, e)));
    EXPECT_NEAR(e_back / e, 1.0, 1e-8);
  }
}

}  // namespace
}  // namespace nhces
