#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nhces/closedform.hpp"
#include "nhces/distributions.hpp"
#include "nhces/error.hpp"
#include "nhces/numerics.hpp"

// Consumption-savings dynamics with CRRA flow utility v(U) = (U^{1-theta}-1)/(1-theta)
// over within-period nonhomothetic CES utility.
//
// Symbols: `discount` is the intertemporal discount factor; `beta` stays the
// gamma scale of epsilon inside PreferenceParams.
namespace nhces::euler {

struct EulerConfig {
  ClosedFormEconomy econ;
  double theta = 1.0;
  double discount = 0.96;
  std::vector<double> rates;    // r_t entering the step t -> t+1
  std::size_t horizon = 0;
  std::vector<double> incomes;  // optional Y_t for the asset diagnostic

  void validate() const {
    require(std::isfinite(theta) && theta >= 0.0, "euler: theta must be >= 0");
    require(discount > 0.0 && discount <= 1.0, "euler: discount must lie in (0, 1]");
    require(rates.size() >= horizon, "euler: rates must cover the horizon");
    for (double r : rates) require(std::isfinite(r) && r > -1.0, "euler: rates must exceed -1");
  }

  // theta + (1 - rho) / alpha
  double normalized_exponent() const { return theta + econ.curvature(); }
};

enum class Mode { normalized, unnormalized };

inline std::string to_string(Mode m) { return m == Mode::normalized ? "normalized" : "unnormalized"; }

/// (E'/E)^theta - discount (1+r) (eps_bar'/eps_bar)^{-1} (P'/P)^{theta-1}.
inline double euler_residual_general(const EulerConfig& cfg, double e_t, double e_next, double r, double p_t,
                                     double p_next, double epsbar_t, double epsbar_next) {
  require(e_t > 0.0 && e_next > 0.0 && p_t > 0.0 && p_next > 0.0 && epsbar_t > 0.0 && epsbar_next > 0.0,
          "euler_residual_general: inputs must be positive");
  return std::pow(e_next / e_t, cfg.theta) -
         cfg.discount * (1.0 + r) * (epsbar_t / epsbar_next) * std::pow(p_next / p_t, cfg.theta - 1.0);
}

/// Growth factor [discount (1+r)]^{alpha / (alpha theta + 1 - rho)}, common to
/// every household when the price index is normalized to one.
inline double growth_factor(const EulerConfig& cfg, double r) {
  const double expo = cfg.normalized_exponent();
  if (expo == 0.0) throw ParameterError("degenerate Euler exponent");
  return std::pow(cfg.discount * (1.0 + r), 1.0 / expo);
}

/// E_{t+1} = E_t [discount (1+r)]^{1/(theta + (1-rho)/alpha)} with P_t = 1.
inline double euler_step_normalized(const EulerConfig& cfg, double e_t, double r) {
  require(e_t > 0.0, "euler_step_normalized: e_t must be positive");
  if (!(cfg.normalized_exponent() > 0.0)) {
    if (cfg.normalized_exponent() == 0.0) throw ParameterError("degenerate Euler exponent");
    throw ParameterError("euler_step_normalized: requires theta + (1 - rho)/alpha > 0");
  }
  return e_t * growth_factor(cfg, r);
}

/// Log-form residual of the step without price-index normalization, with
/// P_t = E_t / U_t from the closed-form map and c = (1-rho)/alpha:
///   (1+c) ln(E'/E) - ln[discount (1+r)] - (theta-1) psi/(1-rho) (E'^{-c} - E^{-c}).
inline double unnormalized_log_residual(const EulerConfig& cfg, double e_t, double e_next, double r) {
  const double c = cfg.econ.curvature();
  const double k = (cfg.theta - 1.0) * cfg.econ.psi() / (1.0 - cfg.econ.rho());
  return (1.0 + c) * std::log(e_next / e_t) - std::log(cfg.discount * (1.0 + r)) -
         k * (std::pow(e_next, -c) - std::pow(e_t, -c));
}

/// Solves the unnormalized Euler equation for E_{t+1} by bracketed
/// Newton-bisection on x = ln(E_{t+1}/E_t).
inline double euler_step_unnormalized(const EulerConfig& cfg, double e_t, double r) {
  require(e_t > 0.0, "euler_step_unnormalized: e_t must be positive");
  const double c = cfg.econ.curvature();
  const double k = (cfg.theta - 1.0) * cfg.econ.psi() / (1.0 - cfg.econ.rho());
  const double log_e = std::log(e_t);
  auto f = [&](double x) { return unnormalized_log_residual(cfg, e_t, std::exp(log_e + x), r); };
  auto fdf = [&](double x) {
    const double e_next = std::exp(log_e + x);
    return std::pair{unnormalized_log_residual(cfg, e_t, e_next, r), (1.0 + c) + k * c * std::pow(e_next, -c)};
  };
  numerics::Bracket bracket;
  try {
    bracket = numerics::expand_bracket(f, 0.0, 0.125, 60, "unnormalized Euler step");
  } catch (const NumericalError&) {
    throw NumericalError("unnormalized Euler step: bracket failure (e_t=" + std::to_string(e_t) +
                         ", r=" + std::to_string(r) + ", theta=" + std::to_string(cfg.theta) + ")");
  }
  const auto root = numerics::newton_bisect(fdf, bracket);
  if (!(std::abs(root.f) <= 1e-12)) {
    throw NumericalError("unnormalized Euler step: no convergence, residual " + std::to_string(root.f));
  }
  const double e_next = std::exp(log_e + root.x);
  if (!std::isfinite(e_next)) throw NumericalError("unnormalized Euler step: expenditure overflow");
  return e_next;
}

struct EulerPath {
  Mode mode = Mode::normalized;
  std::vector<double> expenditures;   // E_0 .. E_T
  std::vector<double> log_utilities;  // closed-form ln U_t
  std::vector<double> growth_factors; // E_{t+1} / E_t
  std::vector<double> residuals;      // general Euler residual for step t
  std::vector<double> assets;         // A_0 = 0, A_{t+1} = (1+r_t) A_t + Y_t - E_t

  double max_abs_residual() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, std::abs(r));
    return m;
  }
};

/// General Euler residual for step t -> t+1 under the given mode's price index.
inline double step_residual(const EulerConfig& cfg, Mode mode, double e_t, double e_next, double r) {
  double p_t = 1.0;
  double p_next = 1.0;
  if (mode == Mode::unnormalized) {
    p_t = e_t / std::exp(log_utility_of_expenditure(cfg.econ, e_t));
    p_next = e_next / std::exp(log_utility_of_expenditure(cfg.econ, e_next));
  }
  return euler_residual_general(cfg, e_t, e_next, r, p_t, p_next, eps_bar(cfg.econ, e_t), eps_bar(cfg.econ, e_next));
}

/// Iterates the first-order condition forward from e0 over the horizon.
/// Budget feasibility is not imposed; the implied asset path (income
/// defaults to e0 each period) is reported as a diagnostic.
inline EulerPath solve_path(const EulerConfig& cfg, double e0, Mode mode) {
  cfg.validate();
  require(e0 > 0.0 && std::isfinite(e0), "solve_path: e0 must be positive");
  EulerPath path;
  path.mode = mode;
  path.expenditures.push_back(e0);
  path.assets.push_back(0.0);
  for (std::size_t t = 0; t < cfg.horizon; ++t) {
    const double e_t = path.expenditures.back();
    const double r = cfg.rates[t];
    const double e_next =
        mode == Mode::normalized ? euler_step_normalized(cfg, e_t, r) : euler_step_unnormalized(cfg, e_t, r);
    path.expenditures.push_back(e_next);
    path.growth_factors.push_back(e_next / e_t);
    path.residuals.push_back(step_residual(cfg, mode, e_t, e_next, r));
    const double income = t < cfg.incomes.size() ? cfg.incomes[t] : e0;
    path.assets.push_back((1.0 + r) * path.assets.back() + income - e_t);
  }
  path.log_utilities.reserve(path.expenditures.size());
  for (double e : path.expenditures) path.log_utilities.push_back(log_utility_of_expenditure(cfg.econ, e));
  return path;
}

/// Amoroso(l, A k, m, n) with A = [discount (1+r)]^{alpha/(alpha theta + 1 - rho)}.
inline AmorosoParams evolve_panel(const EulerConfig& cfg, const AmorosoParams& dist_t, double r) {
  dist_t.validate();
  require(dist_t.l == 0.0, "evolve_panel: location must be 0");
  const double a = cfg.econ.alpha();
  require(a * cfg.theta + 1.0 - cfg.econ.rho() > 0.0, "evolve_panel: requires alpha theta + 1 - rho > 0");
  const double factor = std::pow(cfg.discount * (1.0 + r), a / (a * cfg.theta + 1.0 - cfg.econ.rho()));
  AmorosoParams next = dist_t;
  next.k *= factor;
  return next;
}

struct QuantileRow {
  double probability;
  double predicted;
  double simulated;
};

struct PanelCheck {
  AmorosoParams predicted;
  double scale_factor = 1.0;
  double max_scale_deviation = 0.0;  // max_h |E'_h / E_h - A|
  double ks_distance = 0.0;
  double ks_critical = 0.0;
  std::vector<QuantileRow> quantiles;
  bool passed() const { return max_scale_deviation < 1e-12 && ks_distance < ks_critical; }
};

/// Samples households from dist_t, steps each with the normalized Euler
/// equation, and compares the result with the predicted Amoroso law.
inline PanelCheck panel_simulation_check(const EulerConfig& cfg, const AmorosoParams& dist_t, double r,
                                         std::size_t households, std::uint64_t seed) {
  PanelCheck out;
  out.predicted = evolve_panel(cfg, dist_t, r);
  out.scale_factor = out.predicted.k / dist_t.k;
  const auto before = amoroso_sample(dist_t, households, seed);
  std::vector<double> after(before.size());
  for (std::size_t h = 0; h < before.size(); ++h) {
    after[h] = euler_step_normalized(cfg, before[h], r);
    out.max_scale_deviation = std::max(out.max_scale_deviation, std::abs(after[h] / before[h] - out.scale_factor));
  }
  out.ks_distance = ks_distance(after, [&](double x) { return amoroso_cdf(out.predicted, x); });
  out.ks_critical = ks_critical_1pct(after.size());
  std::sort(after.begin(), after.end());
  for (double q : {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99}) {
    const auto idx = static_cast<std::size_t>(q * static_cast<double>(after.size() - 1));
    out.quantiles.push_back({q, amoroso_quantile(out.predicted, q), after[idx]});
  }
  return out;
}

}  // namespace nhces::euler
