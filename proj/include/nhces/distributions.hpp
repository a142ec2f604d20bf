#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "nhces/error.hpp"
#include "nhces/rng.hpp"

namespace nhces {

/// Gamma density with shape `shape` and scale `scale`, evaluated in log-space.
inline double gamma_log_pdf(double x, double shape, double scale) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  if (x == 0.0) {
    if (shape < 1.0) return std::numeric_limits<double>::infinity();
    if (shape > 1.0) return -std::numeric_limits<double>::infinity();
    return -std::log(scale);
  }
  return (shape - 1.0) * std::log(x) - x / scale - shape * std::log(scale) - std::lgamma(shape);
}

inline double gamma_pdf(double x, double shape, double scale) { return std::exp(gamma_log_pdf(x, shape, scale)); }

/// Amoroso (generalized gamma) parameters: location l, scale k, shapes m and n.
///
/// Density f(x) = |n/k| / Gamma(m) * ((x-l)/k)^(mn-1) * exp(-((x-l)/k)^n) on
/// x >= l. Only the k > 0 branch is supported.
struct AmorosoParams {
  double l = 0.0;
  double k = 1.0;
  double m = 1.0;
  double n = 1.0;

  void validate() const {
    require(std::isfinite(l) && std::isfinite(k) && std::isfinite(m) && std::isfinite(n),
            "amoroso: parameters must be finite");
    require(k > 0.0, "amoroso: scale k must be positive");
    require(m > 0.0, "amoroso: shape m must be positive");
    require(n != 0.0, "amoroso: shape n must be nonzero");
  }

  bool operator==(const AmorosoParams&) const = default;
};

inline double amoroso_log_pdf(const AmorosoParams& p, double x) {
  p.validate();
  if (x < p.l) return -std::numeric_limits<double>::infinity();
  const double y = (x - p.l) / p.k;
  const double mn = p.m * p.n;
  if (y == 0.0) {
    if (p.n < 0.0) return -std::numeric_limits<double>::infinity();
    if (mn > 1.0) return -std::numeric_limits<double>::infinity();
    require(mn == 1.0, "amoroso_pdf: density unbounded at x = l when m*n < 1");
    return std::log(std::abs(p.n / p.k)) - std::lgamma(p.m);
  }
  const double log_y = std::log(y);
  return std::log(std::abs(p.n / p.k)) - std::lgamma(p.m) + (mn - 1.0) * log_y - std::exp(p.n * log_y);
}

inline double amoroso_pdf(const AmorosoParams& p, double x) { return std::exp(amoroso_log_pdf(p, x)); }

// CDF through the regularized incomplete gamma: ((x-l)/k)^n ~ Gamma(m, 1).
inline double amoroso_cdf(const AmorosoParams& p, double x) {
  p.validate();
  if (x <= p.l) return 0.0;
  const double z = std::pow((x - p.l) / p.k, p.n);
  if (!std::isfinite(z)) return p.n > 0.0 ? 1.0 : 0.0;
  return p.n > 0.0 ? boost::math::gamma_p(p.m, z) : boost::math::gamma_q(p.m, z);
}

inline double amoroso_quantile(const AmorosoParams& p, double q) {
  p.validate();
  require(q > 0.0 && q < 1.0, "amoroso_quantile: probability must lie in (0, 1)");
  const double z = p.n > 0.0 ? boost::math::gamma_p_inv(p.m, q) : boost::math::gamma_q_inv(p.m, q);
  return p.l + p.k * std::pow(z, 1.0 / p.n);
}

/// Draws `count` variates as l + k * X^(1/n), X ~ Gamma(m, 1).
inline std::vector<double> amoroso_sample(const AmorosoParams& p, std::size_t count, std::uint64_t seed) {
  p.validate();
  require(count >= 1, "amoroso_sample: count must be at least 1");
  Rng rng(seed);
  std::vector<double> out(count);
  const double inv_n = 1.0 / p.n;
  for (double& x : out) {
    double draw;
    // X^(1/n) can round to 0 for tiny X and n > 0; redraw to keep samples > l.
    do {
      draw = p.l + p.k * std::exp(inv_n * std::log(rng.gamma(p.m)));
    } while (!(draw > p.l) || !std::isfinite(draw));
    x = draw;
  }
  return out;
}

/// Raw moment E[(X-l)^order] = k^order * Gamma(m + order/n) / Gamma(m).
inline double amoroso_moment(const AmorosoParams& p, double order) {
  p.validate();
  const double shifted = p.m + order / p.n;
  if (!(shifted > 0.0)) throw ParameterError("amoroso_moment: moment does not exist (m + order/n <= 0)");
  return std::exp(order * std::log(p.k) + std::lgamma(shifted) - std::lgamma(p.m));
}

enum class AmorosoSpecialCase { exponential, gamma, weibull, frechet };

inline std::string to_string(AmorosoSpecialCase c) {
  switch (c) {
    case AmorosoSpecialCase::exponential: return "exponential";
    case AmorosoSpecialCase::gamma: return "gamma";
    case AmorosoSpecialCase::weibull: return "weibull";
    case AmorosoSpecialCase::frechet: return "frechet";
  }
  return "unknown";
}

inline std::optional<AmorosoSpecialCase> special_case_reduction(const AmorosoParams& p) {
  p.validate();
  if (p.l != 0.0) return std::nullopt;
  if (p.m == 1.0 && p.n == 1.0) return AmorosoSpecialCase::exponential;
  if (p.n == 1.0) return AmorosoSpecialCase::gamma;
  if (p.m == 1.0) return p.n > 0.0 ? AmorosoSpecialCase::weibull : AmorosoSpecialCase::frechet;
  return std::nullopt;
}

struct GammaRatio {
  double exact;   // Gamma(m + s) / Gamma(m)
  double approx;  // m^s
  double relative_error() const { return std::abs(approx - exact) / std::abs(exact); }
};

inline GammaRatio gamma_ratio_approx(double m, double s) {
  require(m > 0.0 && m + s > 0.0, "gamma_ratio_approx: requires m > 0 and m + s > 0");
  return {std::exp(std::lgamma(m + s) - std::lgamma(m)), std::pow(m, s)};
}

// Kolmogorov-Smirnov statistic of `sample` against a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

}  // namespace nhces
