#pragma once

// CSV emitters behind the command-line subcommands. Each builder returns file
// contents in memory so that determinism can be checked without touching disk.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "nhces/aggregation.hpp"
#include "nhces/closedform.hpp"
#include "nhces/config.hpp"
#include "nhces/core.hpp"
#include "nhces/distributions.hpp"
#include "nhces/euler.hpp"
#include "nhces/logit.hpp"
#include "nhces/oracle.hpp"
#include "nhces/rng.hpp"

namespace nhces::reports {

struct CsvFile {
  std::string name;
  std::string content;
};

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ += (i ? "," : "") + header[i];
    out_ += '\n';
  }

  CsvWriter& operator<<(double x) { return cell(format_double(x)); }
  CsvWriter& operator<<(std::size_t x) { return cell(std::to_string(x)); }
  CsvWriter& operator<<(int x) { return cell(std::to_string(x)); }
  CsvWriter& operator<<(const std::string& s) { return cell(s); }
  CsvWriter& operator<<(const char* s) { return cell(s); }

  std::string str() const {
    if (in_row_ != 0) throw NumericalError("csv: incomplete row");
    return out_;
  }

 private:
  CsvWriter& cell(const std::string& s) {
    if (in_row_) out_ += ',';
    out_ += s;
    if (++in_row_ == columns_) {
      out_ += '\n';
      in_row_ = 0;
    }
    return *this;
  }

  std::size_t columns_;
  std::size_t in_row_ = 0;
  std::string out_;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Fixed stream ids keep each subcommand's draws independent of the others.
enum Stream : std::uint64_t { kGridStream = 1, kAggregateStream, kPanelStream, kLogitStream, kJointStream };

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return Rng::substream(seed, stream).next();
}

inline ClosedFormEconomy closed_form(const config::RunConfig& cfg) {
  return ClosedFormEconomy(cfg.preference).with_upsilon_shift(cfg.verify.upsilon_perturbation);
}

/// Goods grid for `solve`. In quadrature mode with "auto" scale, the truncation
/// is widened to cover the tilted gamma law at every requested expenditure.
inline GoodsGrid build_grid(const config::RunConfig& cfg) {
  if (cfg.grid.mode == "sample") return sample_goods_grid(cfg.preference, cfg.grid.size, derive_seed(cfg.seed, kGridStream));
  QuadratureOptions opts;
  opts.tail_probability = cfg.grid.tail_probability;
  if (cfg.grid.scale_multiplier) {
    opts.scale_multiplier = *cfg.grid.scale_multiplier;
  } else {
    const ClosedFormEconomy econ(cfg.preference);
    double widest = cfg.preference.beta;
    for (double e : cfg.expenditures) widest = std::max(widest, tilted_gamma_scale(econ, e));
    opts.scale_multiplier = widest / cfg.preference.beta;
  }
  return quadrature_goods_grid(cfg.preference, cfg.grid.size, opts);
}

/// Noise location used for the representative goods of the aggregate report.
inline std::pair<double, double> central_noise(const NoiseSpec& noise) {
  return std::visit(
      [](const auto& v) -> std::pair<double, double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Degenerate>) {
          return {v.nu_p, v.nu_omega};
        } else if constexpr (std::is_same_v<T, IndependentNormal>) {
          return {v.mu_p, v.mu_omega};
        } else {
          double a = 0.0;
          double b = 0.0;
          for (const auto& [p, o] : v.pairs) {
            a += p;
            b += o;
          }
          const auto n = static_cast<double>(v.pairs.size());
          return {a / n, b / n};
        }
      },
      noise);
}

struct MappingRow {
  double expenditure;
  double log_u_closed;
  double log_u_oracle;
};

inline std::vector<MappingRow> mapping_rows(const config::RunConfig& cfg, const GoodsGrid& grid) {
  const auto econ = closed_form(cfg);
  std::vector<MappingRow> rows;
  for (double e : cfg.expenditures) {
    rows.push_back({e, log_utility_of_expenditure(econ, e), oracle::log_utility_of_expenditure(grid, cfg.preference.rho, e)});
  }
  return rows;
}

inline std::vector<CsvFile> solve_report(const config::RunConfig& cfg) {
  cfg.validate();
  const auto grid = build_grid(cfg);
  const auto econ = closed_form(cfg);
  const double rho = cfg.preference.rho;

  CsvWriter demand({"expenditure", "good", "epsilon", "price", "omega", "weight", "share", "quantity",
                    "elasticity_closed", "elasticity_fd"});
  for (double e : cfg.expenditures) {
    const auto point = oracle::demand(grid, rho, e);
    const auto fd = oracle::expenditure_elasticity_fd(grid, rho, e);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& g = grid[i];
      demand << e << i << g.epsilon << g.price << g.omega << g.weight << point.shares[i] << point.quantities[i]
             << expenditure_elasticity(econ, g.epsilon, e) << fd[i];
    }
  }

  CsvWriter mapping({"expenditure", "log_u_closed", "log_u_oracle", "deviation"});
  for (const auto& r : mapping_rows(cfg, grid)) {
    mapping << r.expenditure << r.log_u_closed << r.log_u_oracle << std::abs(r.log_u_closed - r.log_u_oracle);
  }
  return {{"demand.csv", demand.str()}, {"mapping.csv", mapping.str()}};
}

inline AggregateEconomy aggregate_economy(const config::RunConfig& cfg) {
  const auto econ = closed_form(cfg);
  const double n = AggregateEconomy::coupled_shape(econ);
  if (cfg.amoroso.n && std::abs(*cfg.amoroso.n - n) > 1e-12 * std::max(1.0, std::abs(n))) {
    throw ParameterError("config: amoroso.n must equal (rho - 1)/alpha = " + format_double(n));
  }
  return AggregateEconomy::coupled(econ, cfg.amoroso.k, cfg.amoroso.m);
}

inline std::vector<CsvFile> aggregate_report(const config::RunConfig& cfg) {
  cfg.validate();
  const auto agg = aggregate_economy(cfg);
  const auto [nu_p, nu_omega] = central_noise(cfg.preference.noise);
  const bool has_mean = agg.mean_exists();

  CsvWriter out({"epsilon", "omega", "price", "exact", "mean_form", "approx", "approx_rel_dev", "quadrature",
                 "quadrature_rel_dev", "mc_mean", "mc_std_error", "mc_z", "expenditure_weighted"});
  for (std::size_t i = 0; i < cfg.amoroso.epsilons.size(); ++i) {
    const auto g = detail::make_good(cfg.preference, cfg.amoroso.epsilons[i], nu_p, nu_omega, 1.0);
    const double exact = aggregate_share(agg, g.epsilon, g.omega, g.price);
    double mean_form = kNaN;
    double approx = kNaN;
    double approx_dev = kNaN;
    if (has_mean) {
      mean_form = aggregate_share_mean_form(agg, g.epsilon, g.omega, g.price);
      const auto a = aggregate_share_approx(agg, g.epsilon, g.omega, g.price);
      approx = a.approx;
      approx_dev = a.relative_deviation;
    }
    const double quad = quadrature_aggregate_share(agg, g.epsilon, g.omega, g.price);
    const auto mc = mc_aggregate_share(agg, g.epsilon, g.omega, g.price, cfg.amoroso.draws,
                                       derive_seed(cfg.seed, kAggregateStream));
    out << g.epsilon << g.omega << g.price << exact << mean_form << approx << approx_dev << quad
        << std::abs(quad - exact) / exact << mc.mean << mc.std_error << (mc.mean - exact) / mc.std_error
        << mc.expenditure_weighted;
  }
  return {{"aggregate.csv", out.str()}};
}

inline euler::EulerConfig euler_config(const config::RunConfig& cfg) {
  euler::EulerConfig e{closed_form(cfg), cfg.euler.theta, cfg.euler.discount, {}, cfg.euler.horizon, cfg.euler.incomes};
  for (std::size_t t = 0; t < cfg.euler.horizon; ++t) e.rates.push_back(cfg.euler.rates[t % cfg.euler.rates.size()]);
  return e;
}

inline std::vector<CsvFile> euler_report(const config::RunConfig& cfg) {
  cfg.validate();
  const auto ecfg = euler_config(cfg);
  const auto mode = cfg.euler.mode == "normalized" ? euler::Mode::normalized : euler::Mode::unnormalized;
  const auto path = euler::solve_path(ecfg, cfg.euler.e0, mode);

  CsvWriter p({"t", "rate", "expenditure", "log_utility", "growth", "residual", "assets"});
  for (std::size_t t = 0; t < path.expenditures.size(); ++t) {
    const bool step = t < path.growth_factors.size();
    p << t << (step ? ecfg.rates[t] : kNaN) << path.expenditures[t] << path.log_utilities[t]
      << (step ? path.growth_factors[t] : kNaN) << (step ? path.residuals[t] : kNaN) << path.assets[t];
  }

  const auto dist = aggregate_economy(cfg).exp_dist();
  const auto check = euler::panel_simulation_check(ecfg, dist, cfg.euler.rates.front(), cfg.euler.panel_households,
                                                   derive_seed(cfg.seed, kPanelStream));
  CsvWriter q({"probability", "predicted", "simulated", "scale_factor", "max_scale_deviation", "ks_distance",
               "ks_critical", "ks_pass"});
  for (const auto& row : check.quantiles) {
    q << row.probability << row.predicted << row.simulated << check.scale_factor << check.max_scale_deviation
      << check.ks_distance << check.ks_critical << (check.passed() ? 1 : 0);
  }
  return {{"path.csv", p.str()}, {"panel.csv", q.str()}};
}

inline logit::LogitEconomy logit_economy(const config::RunConfig& cfg) {
  auto params = cfg.preference;
  params.rho = cfg.logit.rho;
  auto goods = sample_goods_grid(params, cfg.logit.goods, derive_seed(cfg.seed, kLogitStream));
  return logit::LogitEconomy::at_expenditure(std::move(goods), params.rho, cfg.logit.expenditure);
}

inline std::vector<CsvFile> logit_report(const config::RunConfig& cfg) {
  cfg.validate();
  const auto econ = logit_economy(cfg);
  const auto rep = logit::share_equivalence_report(econ);
  std::vector<std::uint64_t> counts;
  // Simulation is defined only for substitutes; complements leave the columns empty.
  if (econ.rho() > 1.0) counts = logit::simulate_choices(econ, cfg.logit.households, derive_seed(cfg.seed, kLogitStream + 100));
  const auto n = static_cast<double>(cfg.logit.households);

  CsvWriter out({"good", "epsilon", "price", "omega", "weight", "analytic", "nhces_share", "oracle_share",
                 "simulated_freq", "std_error", "z"});
  for (std::size_t i = 0; i < econ.goods().size(); ++i) {
    const auto& g = econ.goods()[i];
    double freq = kNaN;
    double se = kNaN;
    double z = kNaN;
    if (!counts.empty()) {
      freq = static_cast<double>(counts[i]) / n;
      se = std::sqrt(rep.analytic[i] * (1.0 - rep.analytic[i]) / n);
      z = (freq - rep.analytic[i]) / se;
    }
    out << i << g.epsilon << g.price << g.omega << g.weight << rep.analytic[i] << rep.logit[i] << rep.oracle[i] << freq
        << se << z;
  }
  return {{"logit.csv", out.str()}};
}

inline CsvFile joint_figure(const config::RunConfig& cfg) {
  const auto grid = sample_goods_grid(cfg.preference, cfg.figures.joint_goods, derive_seed(cfg.seed, kJointStream));
  CsvWriter out({"good", "epsilon", "log_price", "log_omega"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << i << grid[i].epsilon << std::log(grid[i].price) << std::log(grid[i].omega);
  }
  return {"joint.csv", out.str()};
}

inline CsvFile amoroso_figure(const config::RunConfig& cfg) {
  CsvWriter out({"curve", "l", "k", "m", "n", "x", "pdf"});
  for (std::size_t c = 0; c < cfg.figures.amoroso.size(); ++c) {
    const auto& p = cfg.figures.amoroso[c];
    p.validate();
    for (std::size_t j = 1; j <= cfg.figures.points; ++j) {
      const double x = p.l + cfg.figures.x_max * static_cast<double>(j) / static_cast<double>(cfg.figures.points);
      out << c << p.l << p.k << p.m << p.n << x << amoroso_pdf(p, x);
    }
  }
  return {"amoroso_fig.csv", out.str()};
}

inline std::vector<CsvFile> fig_report(const config::RunConfig& cfg, const std::string& which) {
  cfg.validate();
  require(which == "joint" || which == "amoroso" || which == "all", "fig: --which must be joint, amoroso or all");
  std::vector<CsvFile> files;
  if (which != "amoroso") files.push_back(joint_figure(cfg));
  if (which != "joint") files.push_back(amoroso_figure(cfg));
  return files;
}

/// Writes via a temporary file and rename so readers never see partial output.
inline void write_atomic(const std::filesystem::path& dir, const CsvFile& file) {
  std::filesystem::create_directories(dir);
  const auto target = dir / file.name;
  const auto tmp = dir / (file.name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot write " + tmp.string());
    out << file.content;
    if (!out) throw NumericalError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace nhces::reports
