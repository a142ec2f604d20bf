#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nhces/config.hpp"
#include "nhces/error.hpp"
#include "nhces/reports.hpp"
#include "nhces/verify.hpp"

namespace {

constexpr int kExitVerifyFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<double> expenditures;
  bool dump_config = false;
  std::string which = "all";
};

void write_all(const nhces::config::RunConfig& cfg, const std::vector<nhces::reports::CsvFile>& files) {
  for (const auto& f : files) {
    nhces::reports::write_atomic(cfg.output_dir, f);
    std::cout << "wrote " << (std::filesystem::path(cfg.output_dir) / f.name).string() << "\n";
  }
}

int run(const Options& opt) {
  auto cfg = nhces::config::load(opt.config_path);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.out) cfg.output_dir = *opt.out;
  if (!opt.expenditures.empty()) cfg.expenditures = opt.expenditures;
  cfg.validate();

  if (opt.dump_config) {
    std::cout << nhces::config::dump(cfg);
    return EXIT_SUCCESS;
  }
  const auto& c = opt.command;
  if (c == "solve") write_all(cfg, nhces::reports::solve_report(cfg));
  if (c == "aggregate") write_all(cfg, nhces::reports::aggregate_report(cfg));
  if (c == "euler") write_all(cfg, nhces::reports::euler_report(cfg));
  if (c == "logit") write_all(cfg, nhces::reports::logit_report(cfg));
  if (c == "fig") write_all(cfg, nhces::reports::fig_report(cfg, opt.which));
  if (c == "verify") {
    const auto results = nhces::verify::run_suite(cfg);
    nhces::verify::print_table(std::cout, results);
    nhces::reports::write_atomic(cfg.output_dir, nhces::verify::results_csv(results));
    return nhces::verify::all_passed(results) ? EXIT_SUCCESS : kExitVerifyFail;
  }
  return EXIT_SUCCESS;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonhomothetic CES demand systems: solvers, aggregation, dynamics and verification"};
  Options opt;
  app.add_option("command", opt.command, "solve | aggregate | euler | logit | fig | verify")
      ->required()
      ->check(CLI::IsMember({"solve", "aggregate", "euler", "logit", "fig", "verify"}));
  app.add_option("--config", opt.config_path, "JSON configuration file")->required();
  app.add_option("--seed", opt.seed, "override the configured seed");
  app.add_option("--out", opt.out, "override the output directory");
  app.add_option("--expenditures", opt.expenditures, "comma-separated expenditure levels")->delimiter(',');
  app.add_flag("--dump-config", opt.dump_config, "print the parsed configuration with defaults and exit");
  app.add_option("--which", opt.which, "figure data for `fig`")->check(CLI::IsMember({"joint", "amoroso", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    return run(opt);
  } catch (const nhces::ParameterError& e) {
    std::cerr << "nhces: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "nhces: numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}
