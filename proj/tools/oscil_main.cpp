#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "oscil/cli_app.hpp"

namespace {

int load_config(const std::string& path, oscil::cli::RunConfig& cfg,
                std::ostream& err) {
  if (path.empty()) {
    cfg = oscil::cli::default_config();
    return 0;
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    err << "cannot read config file: " << path << "\n";
    return oscil::cli::kConfigError;
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    cfg = oscil::cli::parse_config(ss.str());
  } catch (const oscil::ConfigError& e) {
    err << e.what() << "\n";
    return oscil::cli::kConfigError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oscillation criteria, simulation and non-oscillating solution "
               "construction for coupled higher-order nonlinear ODE systems"};
  app.require_subcommand(0, 1);

  bool dump_defaults = false;
  app.add_flag("--dump-defaults", dump_defaults,
               "print the default config document and exit");

  std::string config_path, csv_path;
  int example_case = 0;

  CLI::App* check = app.add_subcommand("check-criteria",
                                       "evaluate the oscillation criteria");
  check->add_option("--config", config_path, "config document (JSON)");

  CLI::App* sim = app.add_subcommand("simulate",
                                     "integrate the system and classify the trajectory");
  sim->add_option("--config", config_path, "config document (JSON)");
  sim->add_option("--csv", csv_path, "write the trajectory as CSV");

  CLI::App* construct = app.add_subcommand(
      "construct-nonosc", "construct an explicit non-oscillating solution");
  construct->add_option("--config", config_path, "config document (JSON)");
  construct->add_option("--csv", csv_path, "write the solution grid as CSV");

  CLI::App* repro = app.add_subcommand("reproduce-example",
                                       "re-run a built-in worked example");
  repro->add_option("case", example_case, "example case (1 or 2)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return oscil::cli::kConfigError;
  }

  if (dump_defaults) {
    std::cout << oscil::cli::dump_config(oscil::cli::default_config());
    return oscil::cli::kOk;
  }
  if (repro->parsed())
    return oscil::cli::run_reproduce_example(example_case, std::cout, std::cerr);

  oscil::cli::RunConfig cfg;
  if (int rc = load_config(config_path, cfg, std::cerr); rc != 0) return rc;
  if (!csv_path.empty()) cfg.output.csv = csv_path;

  try {
    if (check->parsed())
      return oscil::cli::run_check_criteria(cfg, std::cout, std::cerr);
    if (sim->parsed())
      return oscil::cli::run_simulate(cfg, std::cout, std::cerr);
    if (construct->parsed())
      return oscil::cli::run_construct_nonosc(cfg, std::cout, std::cerr);
  } catch (const oscil::Error& e) {
    std::cerr << e.what() << "\n";
    return oscil::cli::kConfigError;
  }

  std::cerr << "no subcommand given (try --help)\n";
  return oscil::cli::kConfigError;
}
