#pragma once

#include <cmath>
#include <vector>

#include "nhces/core.hpp"
#include "nhces/error.hpp"
#include "nhces/numerics.hpp"

// Brute-force solution of the implicit nonhomothetic CES system on a finite
// goods grid. Everything is computed in log-space: with
//   t_i(ln U) = ln w_i + (1 - rho) (ln p_i - ln Omega_i + eps_i ln U)
// the expenditure function is ln E = LSE_i(t_i) / (1 - rho), and the softmax
// of t_i is the vector of expenditure shares.
namespace nhces::oracle {

struct DemandPoint {
  double expenditure = 0.0;
  double utility = 0.0;
  double log_utility = 0.0;
  std::vector<double> shares;      // w_i p_i C_i / E, sums to one
  std::vector<double> quantities;  // C_i per unit mass of good i
  double eps_bar = 0.0;            // sum_i s_i eps_i
};

namespace detail {

// Holds the u-independent part of t_i so repeated evaluations are cheap.
class LogExpenditure {
 public:
  LogExpenditure(const GoodsGrid& grid, double rho) : grid_(grid), a_(1.0 - rho) {
    require(rho > 0.0 && rho != 1.0, "oracle: rho must be positive and differ from 1");
    base_.reserve(grid.size());
    for (const auto& g : grid) base_.push_back(std::log(g.weight) + a_ * (std::log(g.price) - std::log(g.omega)));
    terms_.resize(grid.size());
  }

  // Returns ln E at ln U and leaves the shares in terms_.
  double operator()(double log_u) {
    for (std::size_t i = 0; i < base_.size(); ++i) terms_[i] = base_[i] + a_ * grid_[i].epsilon * log_u;
    return numerics::softmax_inplace(terms_) / a_;
  }

  // d ln E / d ln U for the shares left by the last call.
  double eps_bar() const {
    double s = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) s += terms_[i] * grid_[i].epsilon;
    return s;
  }

  const std::vector<double>& shares() const { return terms_; }

 private:
  const GoodsGrid& grid_;
  double a_;
  std::vector<double> base_;
  std::vector<double> terms_;
};

}  // namespace detail

inline double log_expenditure_of_log_utility(const GoodsGrid& grid, double rho, double log_u) {
  detail::LogExpenditure f(grid, rho);
  return f(log_u);
}

inline double expenditure_of_utility(const GoodsGrid& grid, double rho, double u) {
  require(u > 0.0 && std::isfinite(u), "expenditure_of_utility: u must be positive");
  const double e = std::exp(log_expenditure_of_log_utility(grid, rho, std::log(u)));
  if (!std::isfinite(e) || !(e > 0.0)) throw NumericalError("expenditure overflow");
  return e;
}

inline constexpr int kMaxBracketDoublings = 200;

/// Solves ln E(ln U) = ln e for ln U. ln E is increasing in ln U with slope
/// eps_bar, which doubles as the Newton derivative.
inline double log_utility_of_expenditure(const GoodsGrid& grid, double rho, double e) {
  require(e > 0.0 && std::isfinite(e), "utility_of_expenditure: e must be positive");
  detail::LogExpenditure f(grid, rho);
  const double target = std::log(e);
  auto value = [&](double x) { return f(x) - target; };
  numerics::Bracket bracket;
  try {
    bracket = numerics::expand_bracket(value, 0.0, 1.0, kMaxBracketDoublings, "utility inversion");
  } catch (const NumericalError&) {
    throw NumericalError("inversion bracket failure");
  }
  auto fdf = [&](double x) {
    const double v = f(x) - target;
    return std::pair{v, f.eps_bar()};
  };
  const auto root = numerics::newton_bisect(fdf, bracket);
  if (!(std::abs(root.f) <= 1e-12)) throw NumericalError("utility inversion did not converge");
  return root.x;
}

inline double utility_of_expenditure(const GoodsGrid& grid, double rho, double e) {
  const double u = std::exp(log_utility_of_expenditure(grid, rho, e));
  if (!std::isfinite(u) || !(u > 0.0)) throw NumericalError("utility overflow");
  return u;
}

/// Hicksian demand C_i = (p_i/E)^{-rho} (Omega_i U^{-eps_i})^{rho-1} at expenditure e.
inline DemandPoint demand(const GoodsGrid& grid, double rho, double e) {
  DemandPoint d;
  d.expenditure = e;
  d.log_utility = log_utility_of_expenditure(grid, rho, e);
  d.utility = std::exp(d.log_utility);
  detail::LogExpenditure f(grid, rho);
  f(d.log_utility);
  d.shares = f.shares();
  d.eps_bar = f.eps_bar();
  const double log_e = std::log(e);
  d.quantities.reserve(grid.size());
  for (const auto& g : grid) {
    const double log_c = -rho * (std::log(g.price) - log_e) +
                         (rho - 1.0) * (std::log(g.omega) - g.epsilon * d.log_utility);
    d.quantities.push_back(std::exp(log_c));
  }
  return d;
}

inline constexpr double kDefaultRelStep = 1e-6;

/// Central finite-difference expenditure elasticities d ln C_i / d ln E.
inline std::vector<double> expenditure_elasticity_fd(const GoodsGrid& grid, double rho, double e,
                                                     double rel_step = kDefaultRelStep) {
  require(e > 0.0, "expenditure_elasticity_fd: e must be positive");
  require(rel_step > 0.0 && rel_step < 1e-3, "expenditure_elasticity_fd: rel_step must lie in (0, 1e-3)");
  const auto up = demand(grid, rho, e * (1.0 + rel_step));
  const auto down = demand(grid, rho, e * (1.0 - rel_step));
  std::vector<double> eta(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    eta[i] = (std::log(up.quantities[i]) - std::log(down.quantities[i])) / (2.0 * rel_step);
  }
  return eta;
}

}  // namespace nhces::oracle
