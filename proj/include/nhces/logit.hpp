#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "nhces/core.hpp"
#include "nhces/error.hpp"
#include "nhces/numerics.hpp"
#include "nhces/oracle.hpp"
#include "nhces/rng.hpp"

// Discrete-choice microfoundation. A household picks the single good that
// maximizes V_i = ln Omega_i + (1 - eps_i) ln(E/p) - ln(p_i/p) + mu nu_i with
// nu_i standard Gumbel and mu = -1/(1 - rho).
namespace nhces::logit {

/// [sum_i w_i (p_i/Omega_i U^{eps_i - 1})^{1-rho}]^{1/(1-rho)}, equal to E/U.
inline double ideal_price_index(const GoodsGrid& goods, double rho, double u) {
  require(u > 0.0 && std::isfinite(u), "ideal_price_index: u must be positive");
  require(rho > 0.0 && rho != 1.0, "ideal_price_index: rho must be positive and differ from 1");
  const double a = 1.0 - rho;
  const double log_u = std::log(u);
  std::vector<double> terms;
  terms.reserve(goods.size());
  for (const auto& g : goods) {
    terms.push_back(std::log(g.weight) + a * (std::log(g.price) - std::log(g.omega) + (g.epsilon - 1.0) * log_u));
  }
  const double p = std::exp(numerics::log_sum_exp(terms) / a);
  if (!std::isfinite(p) || !(p > 0.0)) throw NumericalError("ideal_price_index: overflow");
  return p;
}

/// Logit population facing a discrete goods grid; weights are replication masses.
class LogitEconomy {
 public:
  LogitEconomy(GoodsGrid goods, double rho, double expenditure, double price_index)
      : goods_(std::move(goods)), rho_(rho), expenditure_(expenditure), price_index_(price_index) {
    require(rho > 0.0 && rho != 1.0, "logit: rho must be positive and differ from 1");
    require(expenditure > 0.0 && std::isfinite(expenditure), "logit: expenditure must be positive");
    require(price_index > 0.0 && std::isfinite(price_index), "logit: price index must be positive");
    mu_ = -1.0 / (1.0 - rho);
  }

  // Solves utility on the grid and sets the price index to its ideal value.
  static LogitEconomy at_expenditure(GoodsGrid goods, double rho, double expenditure) {
    const double u = oracle::utility_of_expenditure(goods, rho, expenditure);
    const double p = ideal_price_index(goods, rho, u);
    return LogitEconomy(std::move(goods), rho, expenditure, p);
  }

  const GoodsGrid& goods() const { return goods_; }
  double rho() const { return rho_; }
  double mu() const { return mu_; }
  double expenditure() const { return expenditure_; }
  double price_index() const { return price_index_; }
  double real_expenditure() const { return expenditure_ / price_index_; }

  // Systematic utility V_i without the shock.
  double systematic_utility(std::size_t i) const {
    const auto& g = goods_[i];
    return std::log(g.omega) + (1.0 - g.epsilon) * std::log(real_expenditure()) -
           std::log(g.price / price_index_);
  }

 private:
  GoodsGrid goods_;
  double rho_;
  double expenditure_;
  double price_index_;
  double mu_ = 0.0;
};

/// Choice probabilities proportional to w_i (E/p)^{(1-eps_i)/mu} (Omega_i^{-1} p_i/p)^{-1/mu}.
inline std::vector<double> choice_probabilities(const LogitEconomy& econ) {
  std::vector<double> logits(econ.goods().size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    logits[i] = std::log(econ.goods()[i].weight) + econ.systematic_utility(i) / econ.mu();
  }
  numerics::softmax_inplace(logits);
  return logits;
}

/// w_i (Omega_i^{-1} p_i/p)^{1-rho} (E/p)^{(eps_i-1)(1-rho)}, unnormalized.
inline std::vector<double> logit_nhces_shares(const LogitEconomy& econ) {
  const double a = 1.0 - econ.rho();
  const double log_real = std::log(econ.real_expenditure());
  std::vector<double> s;
  s.reserve(econ.goods().size());
  for (const auto& g : econ.goods()) {
    s.push_back(std::exp(std::log(g.weight) + a * (std::log(g.price / econ.price_index()) - std::log(g.omega)) +
                         (g.epsilon - 1.0) * a * log_real));
  }
  return s;
}

/// Per-good choice counts of `households` independent argmax decisions.
/// Replication masses enter as ln(w_i) on the shock scale.
inline std::vector<std::uint64_t> simulate_choices(const LogitEconomy& econ, std::uint64_t households,
                                                   std::uint64_t seed) {
  require(households >= 1, "simulate_choices: households must be at least 1");
  if (!(econ.rho() > 1.0)) throw ParameterError("simulation requires substitutes case (mu > 0)");
  const std::size_t n = econ.goods().size();
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = econ.systematic_utility(i) / econ.mu() + std::log(econ.goods()[i].weight);
  }
  Rng rng(seed);
  std::vector<std::uint64_t> counts(n, 0);
  for (std::uint64_t h = 0; h < households; ++h) {
    std::size_t best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double v = scaled[i] + rng.gumbel();
      if (v > best_v) {
        best_v = v;
        best = i;
      }
    }
    ++counts[best];
  }
  return counts;
}

struct ShareEquivalenceReport {
  std::vector<double> analytic;  // choice_probabilities
  std::vector<double> logit;     // logit-implied nhCES shares
  std::vector<double> oracle;    // implicit-aggregator shares at the same E
  double max_analytic_vs_logit = 0.0;
  double max_logit_vs_oracle = 0.0;
  double max_analytic_vs_oracle = 0.0;
};

inline ShareEquivalenceReport share_equivalence_report(const LogitEconomy& econ) {
  ShareEquivalenceReport r;
  r.analytic = choice_probabilities(econ);
  r.logit = logit_nhces_shares(econ);
  r.oracle = oracle::demand(econ.goods(), econ.rho(), econ.expenditure()).shares;
  for (std::size_t i = 0; i < r.analytic.size(); ++i) {
    r.max_analytic_vs_logit = std::max(r.max_analytic_vs_logit, std::abs(r.analytic[i] - r.logit[i]));
    r.max_logit_vs_oracle = std::max(r.max_logit_vs_oracle, std::abs(r.logit[i] - r.oracle[i]));
    r.max_analytic_vs_oracle = std::max(r.max_analytic_vs_oracle, std::abs(r.analytic[i] - r.oracle[i]));
  }
  return r;
}

}  // namespace nhces::logit
