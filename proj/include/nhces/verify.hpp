#pragma once

// Invariant suite behind `nhces verify`. Criteria 1-7 run on fixed parameter
// matrices; the config mapping row and the determinism row use the supplied
// configuration.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "nhces/reports.hpp"

namespace nhces::verify {

struct CheckResult {
  std::string id;
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst observed statistic
  double tolerance = 0.0;  // threshold it is compared with
  double seconds = 0.0;
  double time_limit = 0.0;
  std::string detail;
};

struct Outcome {
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline PreferenceParams preference(double rho, double alpha, double xi_p, double xi_omega = 0.0) {
  PreferenceParams p;
  p.rho = rho;
  p.alpha = alpha;
  p.xi_p = xi_p;
  p.xi_omega = xi_omega;
  return p;
}

inline GoodsGrid covering_grid(const PreferenceParams& p, double e_lo, double e_hi, std::size_t nodes = 2000) {
  const ClosedFormEconomy econ(p);
  QuadratureOptions opts;
  opts.scale_multiplier = std::max({p.beta, tilted_gamma_scale(econ, e_lo), tilted_gamma_scale(econ, e_hi)}) / p.beta;
  return quadrature_goods_grid(p, nodes, opts);
}

inline std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace detail

// C1: |ln U closed - ln U oracle| over the (rho, alpha, xi, E) matrix.
inline Outcome closed_form_mapping(double upsilon_shift) {
  Outcome o{0.0, 1e-6, false, {}};
  for (double rho : {0.5, 2.0}) {
    for (double alpha : {1.0, 2.0}) {
      for (double xi : {0.0, 0.3}) {
        const auto p = detail::preference(rho, alpha, xi);
        const auto econ = ClosedFormEconomy(p).with_upsilon_shift(upsilon_shift);
        const auto grid = detail::covering_grid(p, 0.25, 4.0);
        for (double e : {0.25, 1.0, 4.0}) {
          const double dev = std::abs(log_utility_of_expenditure(econ, e) - oracle::log_utility_of_expenditure(grid, rho, e));
          o.value = std::max(o.value, dev);
        }
      }
    }
  }
  o.passed = o.value <= o.tolerance;
  o.detail = "24 grids x 3 expenditures";
  return o;
}

// C2: closed-form elasticities vs central differences on 50 goods, plus Engel aggregation.
inline Outcome elasticity(double upsilon_shift) {
  Outcome o{0.0, 1e-5, false, {}};
  double engel_dev = 0.0;
  for (double rho : {0.5, 2.0}) {
    const auto p = detail::preference(rho, 2.0, 0.3);
    const auto econ = ClosedFormEconomy(p).with_upsilon_shift(upsilon_shift);
    const auto grid = detail::covering_grid(p, 0.5, 2.0);
    const std::size_t stride = grid.size() / 50;
    for (double e : {0.5, 1.0, 2.0}) {
      const auto fd = oracle::expenditure_elasticity_fd(grid, rho, e);
      for (std::size_t j = 0; j < 50; ++j) {
        const std::size_t i = j * stride + stride / 2;
        o.value = std::max(o.value, std::abs(fd[i] - expenditure_elasticity(econ, grid[i].epsilon, e)));
      }
      double engel = 0.0;
      for (const auto& g : grid) {
        engel += g.weight * household_share(econ, g.epsilon, g.omega, g.price, e) *
                 expenditure_elasticity(econ, g.epsilon, e);
      }
      engel_dev = std::max(engel_dev, std::abs(engel - 1.0));
    }
  }
  o.passed = o.value <= o.tolerance && engel_dev <= 1e-6;
  o.detail = detail::fmt("max |sum s eta - 1| = %.3g (tol 1e-6)", engel_dev);
  return o;
}

// C3: (eps, xi) -> (3 eps, xi / 3) leaves quantities and shares unchanged.
inline Outcome beta_invariance() {
  Outcome o{0.0, 1e-9, false, {}};
  bool ok = true;
  for (double rho : {0.5, 2.0}) {
    const auto rep = beta_invariance_check(detail::preference(rho, 2.0, 0.3, -0.1), 3.0, 17);
    o.value = std::max({o.value, rep.max_quantity_deviation, rep.max_share_deviation});
    ok = ok && rep.passed();
  }
  o.passed = ok && o.value <= o.tolerance;
  o.detail = "relative deviation, k = 3";
  return o;
}

// C4: aggregate shares against quadrature, Monte Carlo, the mean form and the approximation.
inline Outcome aggregation(std::uint64_t seed) {
  Outcome o{0.0, 1e-8, false, {}};
  double max_z = 0.0;
  double max_identity = 0.0;
  double max_approx = 0.0;
  const std::vector<std::array<double, 4>> cases{{2.0, 1.0, 2.0, 1.0}, {0.5, 2.0, 6.0, 1.0}};
  for (const auto& [rho, alpha, m, k] : cases) {
    const ClosedFormEconomy econ(detail::preference(rho, alpha, 0.0));
    const auto agg = AggregateEconomy::coupled(econ, k, m);
    for (double eps : {0.5, 1.0, 2.0}) {
      const double exact = aggregate_share(agg, eps, 1.1, 0.9);
      o.value = std::max(o.value, std::abs(quadrature_aggregate_share(agg, eps, 1.1, 0.9) / exact - 1.0));
      const auto mc = mc_aggregate_share(agg, eps, 1.1, 0.9, 1000000, reports::derive_seed(seed, static_cast<std::uint64_t>(40.0 + 4.0 * eps)));
      max_z = std::max(max_z, std::abs(mc.mean - exact) / mc.std_error);
      max_identity = std::max(max_identity, std::abs(aggregate_share_mean_form(agg, eps, 1.1, 0.9) / exact - 1.0));
    }
  }
  // Eq. 16 needs m >> alpha / (rho - 1); rho = 2, alpha = 1 is exact, rho = 3 is not.
  for (double rho : {2.0, 3.0}) {
    const auto big = AggregateEconomy::coupled(ClosedFormEconomy(detail::preference(rho, 1.0, 0.0)), 1.0, 50.0);
    for (double eps : {0.5, 1.0, 2.0}) {
      max_approx = std::max(max_approx, aggregate_share_approx(big, eps, 1.1, 0.9).relative_deviation);
    }
  }
  o.passed = o.value <= o.tolerance && max_z <= 4.0 && max_identity <= 1e-12 && max_approx <= 0.01;
  o.detail = detail::fmt("max MC |z| = %.3g, Eq15 rel dev = %.3g", max_z, max_identity) +
             detail::fmt(", Eq16 rel dev at m=50 = %.3g", max_approx);
  return o;
}

// C5: Euler path residuals, the 2^0.8 growth factor and the panel law.
inline Outcome euler_checks(std::uint64_t seed) {
  Outcome o{0.0, 1e-10, false, {}};
  const ClosedFormEconomy econ(detail::preference(0.5, 2.0, 0.3));
  euler::EulerConfig cfg{econ, 2.0, 0.96, std::vector<double>(40, 0.05), 40, {}};
  for (auto mode : {euler::Mode::normalized, euler::Mode::unnormalized}) {
    o.value = std::max(o.value, euler::solve_path(cfg, 1.0, mode).max_abs_residual());
  }
  euler::EulerConfig unit{econ, 1.0, 1.0, {1.0}, 1, {}};
  const double growth_dev = std::abs(euler::euler_step_normalized(unit, 1.0, 1.0) - std::pow(2.0, 0.8));
  const auto panel = euler::panel_simulation_check(cfg, AmorosoParams{0.0, 1.0, 6.0, -0.25}, 0.05, 100000,
                                                   reports::derive_seed(seed, 50));
  o.passed = o.value < o.tolerance && growth_dev < 1e-12 && std::abs(std::pow(2.0, 0.8) - 1.741101) < 5e-7 &&
             panel.passed();
  o.detail = detail::fmt("growth dev = %.3g, panel scale dev = %.3g", growth_dev, panel.max_scale_deviation) +
             detail::fmt(", KS = %.4g (crit %.4g)", panel.ks_distance, panel.ks_critical);
  return o;
}

// C6: logit probabilities, nhCES shares and oracle shares coincide; simulation agrees.
inline Outcome logit_checks(std::uint64_t seed) {
  Outcome o{0.0, 1e-10, false, {}};
  auto p = detail::preference(2.0, 2.0, 0.3);
  p.noise = IndependentNormal{0.0, 0.3, 0.0, 0.2};
  const auto econ = logit::LogitEconomy::at_expenditure(sample_goods_grid(p, 5, reports::derive_seed(seed, 60)), 2.0, 1.0);
  const auto rep = logit::share_equivalence_report(econ);
  o.value = std::max({rep.max_analytic_vs_logit, rep.max_logit_vs_oracle, rep.max_analytic_vs_oracle});
  const std::uint64_t households = 1000000;
  const auto counts = logit::simulate_choices(econ, households, reports::derive_seed(seed, 61));
  const auto n = static_cast<double>(households);
  double max_z = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double pr = rep.analytic[i];
    max_z = std::max(max_z, std::abs(static_cast<double>(counts[i]) / n - pr) / std::sqrt(pr * (1.0 - pr) / n));
  }
  Rng rng(reports::derive_seed(seed, 62));
  double sum = 0.0;
  for (std::uint64_t h = 0; h < households; ++h) sum += rng.gumbel();
  const double gumbel_z = std::abs(sum / n - 0.5772156649015329) / (M_PI / std::sqrt(6.0 * n));
  o.passed = o.value <= o.tolerance && max_z <= 4.0 && gumbel_z <= 4.0;
  o.detail = detail::fmt("max freq |z| = %.3g, Gumbel mean |z| = %.3g", max_z, gumbel_z);
  return o;
}

// C7: Amoroso density normalization, gamma reduction, sampled moments.
inline Outcome distribution_checks(std::uint64_t seed) {
  Outcome o{0.0, 1e-6, false, {}};
  const std::vector<AmorosoParams> sets{{0.0, 1.0, 1.0, 1.0}, {0.0, 1.5, 2.5, 1.0},  {0.0, 1.0, 2.0, 2.0},
                                        {0.5, 2.0, 3.0, 0.5}, {0.0, 1.0, 3.0, -1.0}, {1.0, 0.7, 4.0, -2.5}};
  boost::math::quadrature::exp_sinh<double> integrator;
  for (const auto& p : sets) {
    auto f = [&](double t) { return t > 0.0 ? amoroso_pdf(p, p.l + t) : 0.0; };
    o.value = std::max(o.value, std::abs(integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity()) - 1.0));
  }
  double gamma_dev = 0.0;
  for (double m : {0.7, 1.0, 2.5, 6.0}) {
    for (double x : {0.05, 0.5, 1.0, 3.0, 10.0}) {
      const double g = gamma_pdf(x, m, 1.3);
      gamma_dev = std::max(gamma_dev, std::abs(amoroso_pdf({0.0, 1.3, m, 1.0}, x) - g) / g);
    }
  }
  double max_z = 0.0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const auto& p = sets[s];
    if (p.m + 2.0 / p.n <= 0.0) continue;  // sample variance undefined
    const auto draws = amoroso_sample(p, 1000000, reports::derive_seed(seed, 70 + s));
    double mean = 0.0;
    double sq = 0.0;
    for (double x : draws) {
      mean += x - p.l;
      sq += (x - p.l) * (x - p.l);
    }
    const auto n = static_cast<double>(draws.size());
    mean /= n;
    const double sd = std::sqrt(sq / n - mean * mean);
    max_z = std::max(max_z, std::abs(mean - amoroso_moment(p, 1.0)) / (sd / std::sqrt(n)));
  }
  o.passed = o.value <= o.tolerance && gamma_dev <= 1e-12 && max_z <= 4.0;
  o.detail = detail::fmt("gamma reduction rel dev = %.3g, moment |z| = %.3g", gamma_dev, max_z);
  return o;
}

// Mapping deviation on the configured economy and grid.
inline Outcome config_mapping(const config::RunConfig& cfg) {
  Outcome o{0.0, 1e-6, false, {}};
  if (cfg.grid.mode != "quadrature") {
    o.passed = true;
    o.value = std::numeric_limits<double>::quiet_NaN();
    o.detail = "not applicable to sampled grids";
    return o;
  }
  const auto grid = reports::build_grid(cfg);
  for (const auto& r : reports::mapping_rows(cfg, grid)) o.value = std::max(o.value, std::abs(r.log_u_closed - r.log_u_oracle));
  o.passed = o.value <= o.tolerance;
  o.detail = detail::fmt("%.0f expenditures", static_cast<double>(cfg.expenditures.size()));
  return o;
}

/// Every subcommand's output, in a fixed order.
inline std::vector<reports::CsvFile> all_reports(const config::RunConfig& cfg) {
  std::vector<reports::CsvFile> files;
  for (auto&& batch : {reports::solve_report(cfg), reports::aggregate_report(cfg), reports::euler_report(cfg),
                       reports::logit_report(cfg), reports::fig_report(cfg, "all")}) {
    files.insert(files.end(), batch.begin(), batch.end());
  }
  return files;
}

// C8: two in-memory runs of every subcommand produce identical bytes.
inline Outcome determinism(const config::RunConfig& cfg) {
  Outcome o{0.0, 0.0, false, {}};
  const auto a = all_reports(cfg);
  const auto b = all_reports(cfg);
  std::size_t differing = a.size() == b.size() ? 0 : a.size() + b.size();
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i].name != b[i].name || a[i].content != b[i].content) ++differing;
  }
  o.value = static_cast<double>(differing);
  o.passed = differing == 0;
  o.detail = detail::fmt("%.0f files compared", static_cast<double>(a.size()));
  return o;
}

inline CheckResult timed(std::string id, std::string name, double limit, const std::function<Outcome()>& run) {
  CheckResult r;
  r.id = std::move(id);
  r.name = std::move(name);
  r.time_limit = limit;
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o.passed = false;
    o.value = std::numeric_limits<double>::quiet_NaN();
    o.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.passed = o.passed && r.seconds < limit;
  r.value = o.value;
  r.tolerance = o.tolerance;
  r.detail = o.detail;
  if (o.passed && !r.passed) r.detail += " (over time limit)";
  return r;
}

inline std::vector<CheckResult> run_suite(const config::RunConfig& cfg) {
  const double shift = cfg.verify.upsilon_perturbation;
  const auto seed = cfg.seed;
  std::vector<CheckResult> out;
  const auto start = std::chrono::steady_clock::now();
  out.push_back(timed("C1", "closed-form mapping", 5.0, [&] { return closed_form_mapping(shift); }));
  out.push_back(timed("C1-config", "closed-form mapping (config)", 5.0, [&] { return config_mapping(cfg); }));
  out.push_back(timed("C2", "expenditure elasticity", 5.0, [&] { return elasticity(shift); }));
  out.push_back(timed("C3", "beta invariance", 2.0, [] { return beta_invariance(); }));
  out.push_back(timed("C4", "aggregation", 30.0, [&] { return aggregation(seed); }));
  out.push_back(timed("C5", "euler dynamics", 20.0, [&] { return euler_checks(seed); }));
  out.push_back(timed("C6", "logit equivalence", 30.0, [&] { return logit_checks(seed); }));
  out.push_back(timed("C7", "amoroso distribution", 20.0, [&] { return distribution_checks(seed); }));
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.push_back(timed("C8", "end-to-end determinism", 120.0 - elapsed, [&] { return determinism(cfg); }));
  return out;
}

inline bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

inline void print_table(std::ostream& os, const std::vector<CheckResult>& results) {
  char line[512];
  std::snprintf(line, sizeof line, "%-10s %-30s %-5s %12s %10s %8s  %s\n", "id", "check", "pass", "value", "tol",
                "sec", "detail");
  os << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-10s %-30s %-5s %12.4g %10.3g %8.2f  %s\n", r.id.c_str(), r.name.c_str(),
                  r.passed ? "PASS" : "FAIL", r.value, r.tolerance, r.seconds, r.detail.c_str());
    os << line;
  }
  os << (all_passed(results) ? "verify: all checks passed\n" : "verify: FAILED\n");
}

// Timings are left out so the file is reproducible.
inline reports::CsvFile results_csv(const std::vector<CheckResult>& results) {
  reports::CsvWriter out({"id", "check", "pass", "value", "tolerance"});
  for (const auto& r : results) out << r.id << r.name << (r.passed ? 1 : 0) << r.value << r.tolerance;
  return {"verify.csv", out.str()};
}

}  // namespace nhces::verify
