#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "nhces/closedform.hpp"
#include "nhces/distributions.hpp"
#include "nhces/error.hpp"

namespace nhces {

/// Households with closed-form preferences whose total expenditure is
/// Amoroso(0, k, m, n) with n tied to preferences: n = (rho - 1) / alpha.
class AggregateEconomy {
 public:
  AggregateEconomy(ClosedFormEconomy econ, AmorosoParams exp_dist) : econ_(std::move(econ)), dist_(exp_dist) {
    dist_.validate();
    require(dist_.l == 0.0, "aggregate economy: Amoroso location must be 0");
    require(dist_.n == coupled_shape(econ_), "aggregate economy: Amoroso n must equal (rho - 1) / alpha");
  }

  // Builds the distribution with the coupled second shape.
  static AggregateEconomy coupled(const ClosedFormEconomy& econ, double k, double m) {
    return AggregateEconomy(econ, AmorosoParams{0.0, k, m, coupled_shape(econ)});
  }

  static double coupled_shape(const ClosedFormEconomy& econ) { return (econ.rho() - 1.0) / econ.alpha(); }

  const ClosedFormEconomy& econ() const { return econ_; }
  const AmorosoParams& exp_dist() const { return dist_; }

  bool mean_exists() const { return dist_.m + econ_.alpha() / (econ_.rho() - 1.0) > 0.0; }

  // Mean household expenditure k Gamma(m + alpha/(rho-1)) / Gamma(m).
  double mean_expenditure() const {
    if (!mean_exists()) throw ParameterError("aggregate economy: mean expenditure does not exist");
    return amoroso_moment(dist_, 1.0);
  }

 private:
  ClosedFormEconomy econ_;
  AmorosoParams dist_;
};

namespace detail {

// exp(eps upsilon) (omega/p)^{rho-1}, in logs.
inline double log_share_prefactor(const ClosedFormEconomy& econ, double eps_i, double omega_i, double p_i) {
  require(eps_i >= 0.0 && omega_i > 0.0 && p_i > 0.0, "aggregate share: inputs must be positive");
  return eps_i * econ.upsilon() + (econ.rho() - 1.0) * (std::log(omega_i) - std::log(p_i));
}

// ln [1 + eps psi k^{(rho-1)/alpha}]^{m+alpha}
inline double log_inequality_denominator(const AggregateEconomy& agg, double eps_i) {
  const auto& econ = agg.econ();
  const auto& d = agg.exp_dist();
  return (d.m + econ.alpha()) * std::log1p(eps_i * econ.psi() * std::pow(d.k, d.n));
}

}  // namespace detail

/// Population share of good i: integral of the household share against the
/// Amoroso expenditure density,
///   exp(eps upsilon)(omega/p)^{rho-1} Gamma(m+alpha)/Gamma(m) k^{rho-1} / [1 + eps psi k^n]^{m+alpha}.
inline double aggregate_share(const AggregateEconomy& agg, double eps_i, double omega_i, double p_i) {
  const auto& econ = agg.econ();
  const auto& d = agg.exp_dist();
  const double log_s = detail::log_share_prefactor(econ, eps_i, omega_i, p_i) + std::lgamma(d.m + econ.alpha()) -
                       std::lgamma(d.m) + (econ.rho() - 1.0) * std::log(d.k) -
                       detail::log_inequality_denominator(agg, eps_i);
  return std::exp(log_s);
}

/// Same share rewritten around the mean expenditure E_bar:
///   ... Gamma(m+alpha)/Gamma(m + alpha/(rho-1)) k^{rho-2} E_bar / [...]^{m+alpha}.
inline double aggregate_share_mean_form(const AggregateEconomy& agg, double eps_i, double omega_i, double p_i) {
  const auto& econ = agg.econ();
  const auto& d = agg.exp_dist();
  const double mean = agg.mean_expenditure();
  const double log_s = detail::log_share_prefactor(econ, eps_i, omega_i, p_i) + std::lgamma(d.m + econ.alpha()) -
                       std::lgamma(d.m + econ.alpha() / (econ.rho() - 1.0)) + (econ.rho() - 2.0) * std::log(d.k) +
                       std::log(mean) - detail::log_inequality_denominator(agg, eps_i);
  return std::exp(log_s);
}

struct ApproxShare {
  double approx;
  double exact;
  double relative_deviation;
};

/// Approximation replacing Gamma(m+alpha)/Gamma(m) k^{rho-1} by E_bar^{rho-1};
/// accurate when m >> alpha / (rho - 1).
inline ApproxShare aggregate_share_approx(const AggregateEconomy& agg, double eps_i, double omega_i, double p_i) {
  const auto& econ = agg.econ();
  const double mean = agg.mean_expenditure();
  const double log_s = detail::log_share_prefactor(econ, eps_i, omega_i, p_i) + (econ.rho() - 1.0) * std::log(mean) -
                       detail::log_inequality_denominator(agg, eps_i);
  ApproxShare out;
  out.approx = std::exp(log_s);
  out.exact = aggregate_share(agg, eps_i, omega_i, p_i);
  out.relative_deviation = std::abs(out.approx - out.exact) / out.exact;
  return out;
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  // Diagnostic: sum_h s_ih E_h / sum_h E_h, the expenditure-weighted share.
  double expenditure_weighted = 0.0;
  std::size_t draws = 0;
};

/// Monte Carlo mean of the household share over Amoroso expenditure draws.
inline McEstimate mc_aggregate_share(const AggregateEconomy& agg, double eps_i, double omega_i, double p_i,
                                     std::size_t draws, std::uint64_t seed) {
  require(draws >= 1000, "mc_aggregate_share: at least 1000 draws required");
  const auto sample = amoroso_sample(agg.exp_dist(), draws, seed);
  // Welford accumulation keeps the variance stable for long runs.
  double mean = 0.0;
  double m2 = 0.0;
  double weighted = 0.0;
  double total_e = 0.0;
  std::size_t count = 0;
  for (double e : sample) {
    const double s = household_share(agg.econ(), eps_i, omega_i, p_i, e);
    ++count;
    const double delta = s - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (s - mean);
    weighted += s * e;
    total_e += e;
  }
  McEstimate out;
  out.mean = mean;
  out.std_error = std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  out.expenditure_weighted = weighted / total_e;
  out.draws = count;
  return out;
}

/// Deterministic quadrature of the household share against the Amoroso
/// density. Integrates over y = (E/k)^n, which is Gamma(m, 1) distributed,
/// so the heavy tail of E for n < 0 maps onto an exponentially decaying one.
inline double quadrature_aggregate_share(const AggregateEconomy& agg, double eps_i, double omega_i, double p_i) {
  const auto& d = agg.exp_dist();
  const double inv_n = 1.0 / d.n;
  auto integrand = [&](double y) -> double {
    if (!(y > 0.0)) return 0.0;
    const double log_e = std::log(d.k) + inv_n * std::log(y);
    const double e = std::exp(log_e);
    if (!(e > 0.0) || !std::isfinite(e)) return 0.0;
    // |dE/dy| = |E / (n y)|
    const double log_jacobian = log_e - std::log(std::abs(d.n) * y);
    const double log_f = amoroso_log_pdf(d, e) + log_jacobian;
    const double s = household_share(agg.econ(), eps_i, omega_i, p_i, e);
    const double v = s * std::exp(log_f);
    return std::isfinite(v) ? v : 0.0;
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0;
  const double value = integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-14, &error);
  if (!std::isfinite(value)) throw NumericalError("quadrature_aggregate_share: integral not finite");
  return value;
}

}  // namespace nhces
