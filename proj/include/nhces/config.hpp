#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nhces/core.hpp"
#include "nhces/distributions.hpp"
#include "nhces/error.hpp"

namespace nhces::config {

using nlohmann::json;

struct GridSettings {
  std::string mode = "quadrature";  // "quadrature" or "sample"
  std::size_t size = 2000;
  double tail_probability = 1e-10;
  std::optional<double> scale_multiplier;  // unset: widen to the largest tilted scale
};

struct AmorosoSettings {
  double k = 1.0;
  double m = 6.0;
  std::optional<double> n;  // must equal (rho - 1)/alpha when given
  std::vector<double> epsilons{0.0, 0.5, 1.0, 2.0, 4.0};
  std::size_t draws = 1000000;
};

struct EulerSettings {
  double theta = 2.0;
  double discount = 0.96;
  std::vector<double> rates{0.05};  // recycled cyclically up to the horizon
  std::size_t horizon = 40;
  double e0 = 1.0;
  std::string mode = "normalized";
  std::vector<double> incomes;
  std::size_t panel_households = 100000;
};

struct LogitSettings {
  double rho = 2.0;
  std::size_t goods = 5;
  double expenditure = 3.0;
  std::uint64_t households = 1000000;
};

struct FigureSettings {
  std::size_t joint_goods = 2000;
  std::vector<AmorosoParams> amoroso{{0, 1, 1, 1}, {0, 1, 2, 1}, {0, 1, 4, 1}, {0, 1, 2, 0.5},
                                     {0, 1, 2, 2},  {0, 1, 2, -0.5}, {0, 2, 2, -1}};
  double x_max = 5.0;
  std::size_t points = 200;
};

struct VerifySettings {
  double upsilon_perturbation = 0.0;
};

struct RunConfig {
  std::uint64_t seed = 20240101;
  std::string output_dir = "out";
  PreferenceParams preference{0.5, 2.0, 1.0, 0.3, 0.0, Degenerate{}};
  GridSettings grid;
  std::vector<double> expenditures{0.25, 1.0, 4.0};
  AmorosoSettings amoroso;
  EulerSettings euler;
  LogitSettings logit;
  FigureSettings figures;
  VerifySettings verify;

  void validate() const {
    preference.validate();
    require(grid.mode == "quadrature" || grid.mode == "sample", "grid.mode must be 'quadrature' or 'sample'");
    require(grid.size >= 1, "grid.size must be positive");
    require(!expenditures.empty(), "expenditures must be nonempty");
    for (double e : expenditures) require(e > 0.0, "expenditures must be positive");
    require(euler.mode == "normalized" || euler.mode == "unnormalized",
            "euler.mode must be 'normalized' or 'unnormalized'");
    require(!euler.rates.empty(), "euler.rates must be nonempty");
    require(logit.goods >= 1 && logit.households >= 1, "logit.goods and logit.households must be positive");
    require(figures.points >= 2 && figures.x_max > 0.0, "figures.points >= 2 and figures.x_max > 0 required");
  }
};

namespace detail {

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

inline void require_object(const json& j, const char* name) {
  if (!j.is_object()) throw ParameterError(std::string("config: section '") + name + "' must be an object");
}

inline json noise_to_json(const NoiseSpec& noise) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Degenerate>) {
          return {{"type", "degenerate"}, {"nu_p", v.nu_p}, {"nu_omega", v.nu_omega}};
        } else if constexpr (std::is_same_v<T, IndependentNormal>) {
          return {{"type", "independent_normal"}, {"mu_p", v.mu_p},         {"sigma_p", v.sigma_p},
                  {"mu_omega", v.mu_omega},       {"sigma_omega", v.sigma_omega}};
        } else {
          json pairs = json::array();
          for (const auto& [a, b] : v.pairs) pairs.push_back({a, b});
          return {{"type", "empirical"}, {"pairs", pairs}};
        }
      },
      noise);
}

inline NoiseSpec noise_from_json(const json& j) {
  require_object(j, "noise");
  std::string type = "degenerate";
  read(j, "type", type);
  if (type == "degenerate") {
    Degenerate d;
    read(j, "nu_p", d.nu_p);
    read(j, "nu_omega", d.nu_omega);
    return d;
  }
  if (type == "independent_normal") {
    IndependentNormal n;
    read(j, "mu_p", n.mu_p);
    read(j, "sigma_p", n.sigma_p);
    read(j, "mu_omega", n.mu_omega);
    read(j, "sigma_omega", n.sigma_omega);
    return n;
  }
  if (type == "empirical") {
    Empirical e;
    std::vector<std::vector<double>> rows;
    read(j, "pairs", rows);
    for (const auto& r : rows) {
      require(r.size() == 2, "config: empirical pairs must have two entries");
      e.pairs.emplace_back(r[0], r[1]);
    }
    return e;
  }
  throw ParameterError("config: unknown noise type '" + type + "'");
}

inline json amoroso_to_json(const AmorosoParams& p) { return {{"l", p.l}, {"k", p.k}, {"m", p.m}, {"n", p.n}}; }

inline AmorosoParams amoroso_from_json(const json& j) {
  require_object(j, "amoroso curve");
  AmorosoParams p;
  read(j, "l", p.l);
  read(j, "k", p.k);
  read(j, "m", p.m);
  read(j, "n", p.n);
  return p;
}

}  // namespace detail

inline json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["preference"] = {{"rho", c.preference.rho},   {"alpha", c.preference.alpha}, {"beta", c.preference.beta},
                     {"xi_p", c.preference.xi_p}, {"xi_omega", c.preference.xi_omega}};
  j["noise"] = detail::noise_to_json(c.preference.noise);
  j["grid"] = {{"mode", c.grid.mode}, {"size", c.grid.size}, {"tail_probability", c.grid.tail_probability}};
  j["grid"]["scale_multiplier"] = c.grid.scale_multiplier ? json(*c.grid.scale_multiplier) : json("auto");
  j["expenditures"] = c.expenditures;
  j["amoroso"] = {{"k", c.amoroso.k}, {"m", c.amoroso.m}, {"epsilons", c.amoroso.epsilons}, {"draws", c.amoroso.draws}};
  if (c.amoroso.n) j["amoroso"]["n"] = *c.amoroso.n;
  j["euler"] = {{"theta", c.euler.theta},     {"discount", c.euler.discount},
                {"rates", c.euler.rates},     {"horizon", c.euler.horizon},
                {"e0", c.euler.e0},           {"mode", c.euler.mode},
                {"incomes", c.euler.incomes}, {"panel_households", c.euler.panel_households}};
  j["logit"] = {{"rho", c.logit.rho},
                {"goods", c.logit.goods},
                {"expenditure", c.logit.expenditure},
                {"households", c.logit.households}};
  json curves = json::array();
  for (const auto& p : c.figures.amoroso) curves.push_back(detail::amoroso_to_json(p));
  j["figures"] = {{"joint_goods", c.figures.joint_goods},
                  {"amoroso", curves},
                  {"x_max", c.figures.x_max},
                  {"points", c.figures.points}};
  j["verify"] = {{"upsilon_perturbation", c.verify.upsilon_perturbation}};
  return j;
}

inline RunConfig from_json(const json& j) {
  if (!j.is_object()) throw ParameterError("config: top level must be an object");
  RunConfig c;
  detail::read(j, "seed", c.seed);
  detail::read(j, "output_dir", c.output_dir);
  if (j.contains("preference")) {
    const auto& p = j.at("preference");
    detail::require_object(p, "preference");
    detail::read(p, "rho", c.preference.rho);
    detail::read(p, "alpha", c.preference.alpha);
    detail::read(p, "beta", c.preference.beta);
    detail::read(p, "xi_p", c.preference.xi_p);
    detail::read(p, "xi_omega", c.preference.xi_omega);
    if (p.contains("noise")) c.preference.noise = detail::noise_from_json(p.at("noise"));
  }
  if (j.contains("noise")) c.preference.noise = detail::noise_from_json(j.at("noise"));
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::require_object(g, "grid");
    detail::read(g, "mode", c.grid.mode);
    detail::read(g, "size", c.grid.size);
    detail::read(g, "tail_probability", c.grid.tail_probability);
    if (g.contains("scale_multiplier") && !g.at("scale_multiplier").is_string()) {
      double v = 1.0;
      detail::read(g, "scale_multiplier", v);
      c.grid.scale_multiplier = v;
    } else if (g.contains("scale_multiplier") && g.at("scale_multiplier") != "auto") {
      throw ParameterError("config: grid.scale_multiplier must be a number or \"auto\"");
    }
  }
  detail::read(j, "expenditures", c.expenditures);
  if (j.contains("amoroso")) {
    const auto& a = j.at("amoroso");
    detail::require_object(a, "amoroso");
    detail::read(a, "k", c.amoroso.k);
    detail::read(a, "m", c.amoroso.m);
    if (a.contains("n")) {
      double n = 0.0;
      detail::read(a, "n", n);
      c.amoroso.n = n;
    }
    if (a.contains("l")) {
      double l = 0.0;
      detail::read(a, "l", l);
      require(l == 0.0, "config: amoroso.l must be 0 (location normalization)");
    }
    detail::read(a, "epsilons", c.amoroso.epsilons);
    detail::read(a, "draws", c.amoroso.draws);
  }
  if (j.contains("euler")) {
    const auto& e = j.at("euler");
    detail::require_object(e, "euler");
    detail::read(e, "theta", c.euler.theta);
    detail::read(e, "discount", c.euler.discount);
    if (e.contains("rate")) {
      double r = 0.0;
      detail::read(e, "rate", r);
      c.euler.rates = {r};
    }
    detail::read(e, "rates", c.euler.rates);
    detail::read(e, "horizon", c.euler.horizon);
    detail::read(e, "e0", c.euler.e0);
    detail::read(e, "mode", c.euler.mode);
    detail::read(e, "incomes", c.euler.incomes);
    detail::read(e, "panel_households", c.euler.panel_households);
  }
  if (j.contains("logit")) {
    const auto& l = j.at("logit");
    detail::require_object(l, "logit");
    detail::read(l, "rho", c.logit.rho);
    detail::read(l, "goods", c.logit.goods);
    detail::read(l, "expenditure", c.logit.expenditure);
    detail::read(l, "households", c.logit.households);
  }
  if (j.contains("figures")) {
    const auto& f = j.at("figures");
    detail::require_object(f, "figures");
    detail::read(f, "joint_goods", c.figures.joint_goods);
    if (f.contains("amoroso")) {
      require(f.at("amoroso").is_array(), "config: figures.amoroso must be an array");
      c.figures.amoroso.clear();
      for (const auto& curve : f.at("amoroso")) c.figures.amoroso.push_back(detail::amoroso_from_json(curve));
    }
    detail::read(f, "x_max", c.figures.x_max);
    detail::read(f, "points", c.figures.points);
  }
  if (j.contains("verify")) {
    const auto& v = j.at("verify");
    detail::require_object(v, "verify");
    detail::read(v, "upsilon_perturbation", c.verify.upsilon_perturbation);
  }
  c.validate();
  return c;
}

inline RunConfig parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config: invalid JSON: ") + e.what());
  }
  return from_json(j);
}

inline RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

inline std::string dump(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace nhces::config
