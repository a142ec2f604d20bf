#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "nhces/distributions.hpp"
#include "nhces/error.hpp"
#include "nhces/numerics.hpp"
#include "nhces/rng.hpp"

namespace nhces {

// Residual noise of log prices and log tastes around their loadings on epsilon:
//   ln p = xi_p * eps + nu_p,  ln Omega = xi_omega * eps + nu_omega.
struct Degenerate {
  double nu_p = 0.0;
  double nu_omega = 0.0;
};

struct IndependentNormal {
  double mu_p = 0.0;
  double sigma_p = 0.0;
  double mu_omega = 0.0;
  double sigma_omega = 0.0;
};

// Any other joint law enters through a finite sample of (nu_p, nu_omega) pairs.
struct Empirical {
  std::vector<std::pair<double, double>> pairs;
};

using NoiseSpec = std::variant<Degenerate, IndependentNormal, Empirical>;

inline void validate(const NoiseSpec& noise) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Degenerate>) {
          require(std::isfinite(v.nu_p) && std::isfinite(v.nu_omega), "noise: values must be finite");
        } else if constexpr (std::is_same_v<T, IndependentNormal>) {
          require(std::isfinite(v.mu_p) && std::isfinite(v.mu_omega), "noise: means must be finite");
          require(v.sigma_p >= 0.0 && v.sigma_omega >= 0.0, "noise: standard deviations must be >= 0");
          require(std::isfinite(v.sigma_p) && std::isfinite(v.sigma_omega),
                  "noise: standard deviations must be finite");
        } else {
          require(!v.pairs.empty(), "noise: empirical pairs must be nonempty");
          for (const auto& [a, b] : v.pairs) {
            require(std::isfinite(a) && std::isfinite(b), "noise: empirical pairs must be finite");
          }
        }
      },
      noise);
}

/// Deep parameters of an economy with gamma-distributed income-elasticity
/// parameters and prices/tastes log-linear in them.
struct PreferenceParams {
  double rho = 0.5;       // substitution parameter, rho > 0, rho != 1
  double alpha = 2.0;     // gamma shape of epsilon
  double beta = 1.0;      // gamma scale of epsilon
  double xi_p = 0.0;      // loading of ln p on epsilon
  double xi_omega = 0.0;  // loading of ln Omega on epsilon
  NoiseSpec noise = Degenerate{};

  void validate() const {
    require(std::isfinite(rho) && rho > 0.0, "preference: rho must be positive");
    require(rho != 1.0, "preference: rho must differ from 1");
    require(std::isfinite(alpha) && alpha > 0.0, "preference: alpha must be positive");
    require(std::isfinite(beta) && beta > 0.0, "preference: beta must be positive");
    require(std::isfinite(xi_p) && std::isfinite(xi_omega), "preference: loadings must be finite");
    nhces::validate(noise);
  }
};

/// M = E[(e^{nu_p} / e^{nu_omega})^{1-rho}].
inline double compute_M(const NoiseSpec& noise, double rho) {
  validate(noise);
  const double a = 1.0 - rho;
  const double log_m = std::visit(
      [a](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Degenerate>) {
          return a * (v.nu_p - v.nu_omega);
        } else if constexpr (std::is_same_v<T, IndependentNormal>) {
          return a * (v.mu_p - v.mu_omega) + 0.5 * a * a * (v.sigma_p * v.sigma_p + v.sigma_omega * v.sigma_omega);
        } else {
          std::vector<double> terms;
          terms.reserve(v.pairs.size());
          for (const auto& [np, no] : v.pairs) terms.push_back(a * (np - no));
          return numerics::log_sum_exp(terms) - std::log(static_cast<double>(terms.size()));
        }
      },
      noise);
  const double m = std::exp(log_m);
  if (!std::isfinite(m) || !(m > 0.0)) throw NumericalError("M diverges");
  return m;
}

struct Good {
  double epsilon;
  double omega;
  double price;
  double weight;
};

/// Finite discretization of the goods continuum. Weights are the measure of
/// each good and sum to one.
class GoodsGrid {
 public:
  GoodsGrid() = default;

  explicit GoodsGrid(std::vector<Good> goods) : goods_(std::move(goods)) {
    require(!goods_.empty(), "goods grid: at least one good required");
    double total = 0.0;
    for (const auto& g : goods_) {
      require(std::isfinite(g.epsilon) && g.epsilon >= 0.0, "goods grid: epsilon must be finite and >= 0");
      require(std::isfinite(g.omega) && g.omega > 0.0, "goods grid: omega must be positive");
      require(std::isfinite(g.price) && g.price > 0.0, "goods grid: price must be positive");
      require(std::isfinite(g.weight) && g.weight > 0.0, "goods grid: weight must be positive");
      total += g.weight;
    }
    require(std::abs(total - 1.0) <= 1e-9, "goods grid: weights must sum to 1");
  }

  // Builds a grid from unnormalized weights, rescaling them to sum to one.
  static GoodsGrid normalized(std::vector<Good> goods) {
    double total = 0.0;
    for (const auto& g : goods) total += g.weight;
    require(total > 0.0 && std::isfinite(total), "goods grid: weights must have a positive finite sum");
    for (auto& g : goods) g.weight /= total;
    return GoodsGrid(std::move(goods));
  }

  std::span<const Good> goods() const { return goods_; }
  std::size_t size() const { return goods_.size(); }
  const Good& operator[](std::size_t i) const { return goods_[i]; }
  auto begin() const { return goods_.begin(); }
  auto end() const { return goods_.end(); }

 private:
  std::vector<Good> goods_;
};

namespace detail {

inline Good make_good(const PreferenceParams& params, double eps, double nu_p, double nu_omega, double weight) {
  return {eps, std::exp(params.xi_omega * eps + nu_omega), std::exp(params.xi_p * eps + nu_p), weight};
}

}  // namespace detail

/// Monte Carlo grid: eps ~ Gamma(alpha, beta), noise drawn per good, equal weights.
///
/// Each good consumes, in order, one standardized Gamma(alpha, 1) variate and
/// then its noise draw, so grids that differ only in (beta, xi) reuse the same
/// underlying draws for a given seed.
inline GoodsGrid sample_goods_grid(const PreferenceParams& params, std::size_t n_goods, std::uint64_t seed) {
  params.validate();
  require(n_goods >= 1, "sample_goods_grid: n_goods must be at least 1");
  Rng rng(seed);
  const double weight = 1.0 / static_cast<double>(n_goods);
  std::vector<Good> goods;
  goods.reserve(n_goods);
  for (std::size_t i = 0; i < n_goods; ++i) {
    const double eps = params.beta * rng.gamma(params.alpha);
    const auto [nu_p, nu_omega] = std::visit(
        [&rng](const auto& v) -> std::pair<double, double> {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Degenerate>) {
            return {v.nu_p, v.nu_omega};
          } else if constexpr (std::is_same_v<T, IndependentNormal>) {
            const double zp = rng.normal();
            const double zo = rng.normal();
            return {v.mu_p + v.sigma_p * zp, v.mu_omega + v.sigma_omega * zo};
          } else {
            const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(v.pairs.size()));
            return v.pairs[std::min(idx, v.pairs.size() - 1)];
          }
        },
        params.noise);
    goods.push_back(detail::make_good(params, eps, nu_p, nu_omega, weight));
  }
  return GoodsGrid(std::move(goods));
}

struct QuadratureOptions {
  // Upper truncation is the (1 - tail_probability) quantile of
  // Gamma(alpha, scale_multiplier * beta). A multiplier above one widens the
  // grid for integrands tilted towards large epsilon.
  double tail_probability = 1e-10;
  double scale_multiplier = 1.0;
};

/// Deterministic grid: Gauss-Legendre on the truncated gamma support with
/// weights proportional to node weight times gamma density, renormalized.
/// Nodes whose density underflows to zero are dropped.
inline GoodsGrid quadrature_goods_grid(const PreferenceParams& params, std::size_t n_nodes,
                                       const QuadratureOptions& options = {}) {
  params.validate();
  require(n_nodes >= 16, "quadrature_goods_grid: n_nodes must be at least 16");
  require(options.tail_probability > 0.0 && options.tail_probability < 0.5,
          "quadrature_goods_grid: tail probability must lie in (0, 0.5)");
  require(options.scale_multiplier >= 1.0, "quadrature_goods_grid: scale multiplier must be >= 1");
  const auto* degenerate = std::get_if<Degenerate>(&params.noise);
  if (degenerate == nullptr) throw ParameterError("quadrature grid requires degenerate noise");

  const double upper = params.beta * options.scale_multiplier *
                       boost::math::gamma_q_inv(params.alpha, options.tail_probability);
  const numerics::GaussLegendre rule(n_nodes);
  const double half = 0.5 * upper;
  std::vector<Good> goods;
  goods.reserve(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double eps = half * (rule.nodes[i] + 1.0);
    const double w = rule.weights[i] * half * gamma_pdf(eps, params.alpha, params.beta);
    if (!(w > 0.0)) continue;
    goods.push_back(detail::make_good(params, eps, degenerate->nu_p, degenerate->nu_omega, w));
  }
  return GoodsGrid::normalized(std::move(goods));
}

}  // namespace nhces
