#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nhces/error.hpp"

namespace nhces::numerics {

// log(sum_i exp(x_i)) with max-shift. Returns -inf for an empty input.
inline double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - top);
  return top + std::log(sum);
}

// Normalized exp(x_i) in place; returns log of the normalizer.
inline double softmax_inplace(std::span<double> x) {
  const double lse = log_sum_exp(x);
  for (double& v : x) v = std::exp(v - lse);
  return lse;
}

// Gauss-Legendre nodes and weights on [-1, 1].
//
// Roots of P_n by Newton iteration from the Tricomi-type initial guess,
// evaluating P_n and P_n' through the three-term recurrence. Adequate well
// beyond n = 10^4 in double precision.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(std::size_t n) : nodes(n), weights(n) {
    require(n >= 1, "Gauss-Legendre rule needs at least one node");
    const std::size_t half = (n + 1) / 2;
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < half; ++i) {
      double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (nd + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
          const double kd = static_cast<double>(k);
          const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
          p0 = p1;
          p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = nd * (x * p1 - p0) / (x * x - 1.0);
        const double step = p1 / dp;
        x -= step;
        if (std::abs(step) <= 1e-16) break;
      }
      // Recompute the derivative at the converged root for the weight.
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = nd * (x * p1 - p0) / (x * x - 1.0);
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = w;
      weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
  }
};

struct Bracket {
  double lo;
  double hi;
  double f_lo;
  double f_hi;
};

// Finds [lo, hi] with a sign change of f by stepping outward from x0 on both
// sides with doubling steps. Throws NumericalError after max_doublings.
template <class F>
Bracket expand_bracket(F&& f, double x0, double step, int max_doublings, const char* what) {
  const double f0 = f(x0);
  if (f0 == 0.0) return {x0, x0, 0.0, 0.0};
  double prev_right = x0;
  double prev_left = x0;
  double f_prev_right = f0;
  double f_prev_left = f0;
  for (int i = 0; i <= max_doublings; ++i) {
    const double right = x0 + step;
    const double fr = f(right);
    if (std::isfinite(fr) && (fr == 0.0 || std::signbit(fr) != std::signbit(f0))) {
      return {prev_right, right, f_prev_right, fr};
    }
    const double left = x0 - step;
    const double fl = f(left);
    if (std::isfinite(fl) && (fl == 0.0 || std::signbit(fl) != std::signbit(f0))) {
      return {left, prev_left, fl, f_prev_left};
    }
    if (std::isfinite(fr)) {
      prev_right = right;
      f_prev_right = fr;
    }
    if (std::isfinite(fl)) {
      prev_left = left;
      f_prev_left = fl;
    }
    step *= 2.0;
  }
  throw NumericalError(std::string(what) + ": bracket not found after " +
                       std::to_string(max_doublings) + " doublings");
}

struct RootResult {
  double x;
  double f;
  int iterations;
};

// Safeguarded Newton on a sign-changing bracket. `fdf(x)` returns
// {f(x), f'(x)}. A Newton step that leaves the current bracket, or a
// non-finite/zero derivative, is replaced by bisection. Iterates until the
// step or bracket width falls below x_tol * (1 + |x|), or f vanishes.
template <class FdF>
RootResult newton_bisect(FdF&& fdf, Bracket b, double x_tol = 4.0 * std::numeric_limits<double>::epsilon(),
                         int max_iter = 400) {
  if (b.f_lo == 0.0) return {b.lo, 0.0, 0};
  if (b.f_hi == 0.0) return {b.hi, 0.0, 0};
  require(std::signbit(b.f_lo) != std::signbit(b.f_hi), "newton_bisect: interval does not bracket a root");
  double lo = b.lo;
  double hi = b.hi;
  const bool lo_negative = b.f_lo < 0.0;
  double x = std::abs(b.f_lo) < std::abs(b.f_hi) ? lo : hi;
  auto [fx, dfx] = fdf(x);
  RootResult best{x, fx, 0};
  for (int iter = 1; iter <= max_iter; ++iter) {
    double next = x - fx / dfx;
    const bool newton_ok = std::isfinite(next) && dfx != 0.0 && next > lo && next < hi;
    if (!newton_ok) next = 0.5 * (lo + hi);
    const double step = next - x;
    x = next;
    std::tie(fx, dfx) = fdf(x);
    if (std::abs(fx) < std::abs(best.f)) best = {x, fx, iter};
    best.iterations = iter;
    if (fx == 0.0) return {x, 0.0, iter};
    if ((fx < 0.0) == lo_negative) {
      lo = x;
    } else {
      hi = x;
    }
    const double scale = x_tol * (1.0 + std::abs(x));
    if (std::abs(step) <= scale || hi - lo <= scale) return best;
  }
  return best;
}

}  // namespace nhces::numerics
