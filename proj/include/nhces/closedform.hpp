#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "nhces/core.hpp"
#include "nhces/error.hpp"
#include "nhces/oracle.hpp"

namespace nhces {

/// Economy satisfying the log-linear price/taste and gamma-epsilon
/// assumptions, with the derived constants of the closed-form E <-> U map:
///   upsilon = 1/beta - (1-rho)(xi_p - xi_omega),  psi = M^{1/alpha} / beta.
class ClosedFormEconomy {
 public:
  explicit ClosedFormEconomy(const PreferenceParams& params)
      : ClosedFormEconomy(params, compute_M(params.noise, params.rho)) {}

  // Uses a given distribution constant instead of computing it from the noise.
  ClosedFormEconomy(const PreferenceParams& params, double M) : params_(params), M_(M) {
    params_.validate();
    require(std::isfinite(M) && M > 0.0, "closed form: M must be positive and finite");
    upsilon_ = 1.0 / params_.beta - (1.0 - params_.rho) * (params_.xi_p - params_.xi_omega);
    psi_ = std::pow(M_, 1.0 / params_.alpha) / params_.beta;
    require(std::isfinite(psi_) && psi_ > 0.0, "closed form: psi must be positive and finite");
  }

  // Copy with upsilon shifted by `delta`; used to check that the verification
  // suite detects a mis-specified mapping.
  ClosedFormEconomy with_upsilon_shift(double delta) const {
    ClosedFormEconomy out = *this;
    out.upsilon_ += delta;
    return out;
  }

  const PreferenceParams& params() const { return params_; }
  double rho() const { return params_.rho; }
  double alpha() const { return params_.alpha; }
  double M() const { return M_; }
  double upsilon() const { return upsilon_; }
  double psi() const { return psi_; }
  // (1 - rho) / alpha, the exponent linking E to eps_bar.
  double curvature() const { return (1.0 - params_.rho) / params_.alpha; }

 private:
  PreferenceParams params_;
  double M_;
  double upsilon_ = 0.0;
  double psi_ = 0.0;
};

/// ln U = upsilon/(1-rho) - psi/(1-rho) * e^{-(1-rho)/alpha}.
inline double log_utility_of_expenditure(const ClosedFormEconomy& econ, double e) {
  require(std::isfinite(e) && e > 0.0, "log_utility_of_expenditure: e must be positive and finite");
  const double a = 1.0 - econ.rho();
  const double tilt = econ.psi() * std::pow(e, -econ.curvature());
  // The gamma integral behind the closed form needs 1/beta_tilde = tilt > 0.
  if (!(tilt > 0.0) || !std::isfinite(tilt)) throw NumericalError("closed form: tilted gamma scale not positive");
  return (econ.upsilon() - tilt) / a;
}

/// Inverse map E = [(upsilon - (1-rho) ln U) / psi]^{-alpha/(1-rho)}.
inline double expenditure_of_log_utility(const ClosedFormEconomy& econ, double log_u) {
  require(std::isfinite(log_u), "expenditure_of_log_utility: ln U must be finite");
  const double a = 1.0 - econ.rho();
  const double inv_scale = econ.upsilon() - a * log_u;
  if (!(inv_scale > 0.0)) throw ParameterError("utility outside attainable range");
  const double e = std::pow(inv_scale / econ.psi(), -econ.alpha() / a);
  if (!std::isfinite(e) || !(e > 0.0)) throw NumericalError("expenditure overflow");
  return e;
}

/// Scale of the expenditure-share-tilted gamma law of epsilon at expenditure e
/// (1 / (psi e^{-(1-rho)/alpha})); its mean is eps_bar.
inline double tilted_gamma_scale(const ClosedFormEconomy& econ, double e) {
  return std::pow(e, econ.curvature()) / econ.psi();
}

inline double eps_bar(const ClosedFormEconomy& econ, double e) {
  require(e > 0.0, "eps_bar: e must be positive");
  return econ.alpha() / econ.psi() * std::pow(e, econ.curvature());
}

// eta_i = rho + (1 - rho) eps_i / eps_bar(E)
inline double expenditure_elasticity(const ClosedFormEconomy& econ, double eps_i, double e) {
  require(eps_i >= 0.0 && e > 0.0, "expenditure_elasticity: requires eps_i >= 0 and e > 0");
  return econ.rho() + (1.0 - econ.rho()) * eps_i / eps_bar(econ, e);
}

/// Expenditure above which good i becomes inferior. Only substitutes
/// (rho > 1) have one; under complements every elasticity stays positive.
inline std::optional<double> elasticity_sign_threshold(const ClosedFormEconomy& econ, double eps_i) {
  require(eps_i > 0.0, "elasticity_sign_threshold: eps_i must be positive");
  const double rho = econ.rho();
  if (rho < 1.0) return std::nullopt;
  const double base = (rho - 1.0) / rho * econ.psi() / econ.alpha() * eps_i;
  return std::pow(base, econ.alpha() / (1.0 - rho));
}

/// Expenditure share density of good i for a household spending e:
///   exp(eps upsilon) (omega/p)^{rho-1} e^{rho-1} exp(-eps psi e^{(rho-1)/alpha}).
inline double household_share(const ClosedFormEconomy& econ, double eps_i, double omega_i, double p_i, double e) {
  require(eps_i >= 0.0 && omega_i > 0.0 && p_i > 0.0 && e > 0.0, "household_share: inputs must be positive");
  const double r1 = econ.rho() - 1.0;
  const double log_s = eps_i * econ.upsilon() + r1 * (std::log(omega_i) - std::log(p_i)) + r1 * std::log(e) -
                       eps_i * econ.psi() * std::pow(e, -econ.curvature());
  return std::exp(log_s);
}

struct BetaInvarianceOptions {
  std::size_t n_goods = 200;
  std::vector<double> expenditures{0.5, 2.0};
  double tolerance = 1e-9;
};

struct BetaInvarianceReport {
  double scale_k = 1.0;
  double max_quantity_deviation = 0.0;    // relative
  double max_share_deviation = 0.0;       // relative
  double max_elasticity_deviation = 0.0;  // absolute, closed form
  double tolerance = 1e-9;
  bool passed() const {
    return max_quantity_deviation < tolerance && max_share_deviation < tolerance &&
           max_elasticity_deviation < 1e-12;
  }
};

/// Compares oracle demand under (alpha, beta, xi_p, xi_omega) with the
/// rescaled economy (alpha, k beta, xi_p/k, xi_omega/k), built from the same
/// draws so that eps_B = k eps_A and prices and tastes coincide.
inline BetaInvarianceReport beta_invariance_check(const PreferenceParams& params, double scale_k,
                                                  std::uint64_t grid_seed,
                                                  const BetaInvarianceOptions& options = {}) {
  require(scale_k > 0.0 && std::isfinite(scale_k), "beta_invariance_check: scale_k must be positive");
  PreferenceParams scaled = params;
  scaled.beta *= scale_k;
  scaled.xi_p /= scale_k;
  scaled.xi_omega /= scale_k;
  const auto grid_a = sample_goods_grid(params, options.n_goods, grid_seed);
  const auto grid_b = sample_goods_grid(scaled, options.n_goods, grid_seed);

  BetaInvarianceReport report;
  report.scale_k = scale_k;
  report.tolerance = options.tolerance;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
  const ClosedFormEconomy econ_a(params);
  const ClosedFormEconomy econ_b(scaled);
  for (double e : options.expenditures) {
    const auto da = oracle::demand(grid_a, params.rho, e);
    const auto db = oracle::demand(grid_b, params.rho, e);
    for (std::size_t i = 0; i < grid_a.size(); ++i) {
      report.max_quantity_deviation = std::max(report.max_quantity_deviation, rel(da.quantities[i], db.quantities[i]));
      report.max_share_deviation = std::max(report.max_share_deviation, rel(da.shares[i], db.shares[i]));
      const double eta_a = expenditure_elasticity(econ_a, grid_a[i].epsilon, e);
      const double eta_b = expenditure_elasticity(econ_b, grid_b[i].epsilon, e);
      report.max_elasticity_deviation = std::max(report.max_elasticity_deviation, std::abs(eta_a - eta_b));
    }
  }
  return report;
}

}  // namespace nhces
