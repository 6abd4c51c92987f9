// Command line front end for the time-periodic solver library.
//
//   tpfem solve   --config run.json            one solve, report.json + residuals.csv
//   tpfem table   --config run.json            mesh/steps sweep, table.csv
//   tpfem speedup --config run.json --threads 1,2,4
//
// Exit codes: 0 all requested solves converged, 2 some solve hit its
// iteration cap, 1 configuration or runtime error.

#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tpfem/config.hpp"
#include "tpfem/runner.hpp"

namespace {

std::vector<int> parse_thread_list(const std::string& text) {
  std::vector<int> counts;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t used = 0;
      const int value = std::stoi(item, &used);
      if (used != item.size() || value < 1) throw std::invalid_argument(item);
      counts.push_back(value);
    } catch (const std::exception&) {
      throw tpfem::ConfigError("--threads: expected comma separated positive integers, got '" +
                               text + "'");
    }
  }
  if (counts.empty()) throw tpfem::ConfigError("--threads: empty thread list");
  return counts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-periodic solver for nonlinear eddy current problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string thread_list = "1,2,4";

  CLI::App* solve = app.add_subcommand("solve", "Run the configured method(s) once");
  solve->add_option("--config", config_path, "JSON run configuration")->required();

  CLI::App* table = app.add_subcommand("table", "Run all methods over the configured sweep");
  table->add_option("--config", config_path, "JSON run configuration")->required();

  CLI::App* speedup = app.add_subcommand("speedup", "Repeat the fixed-point solve per thread count");
  speedup->add_option("--config", config_path, "JSON run configuration")->required();
  speedup->add_option("--threads", thread_list, "Comma separated thread counts (default 1,2,4)");

  CLI11_PARSE(app, argc, argv);

  try {
    const tpfem::RunConfig cfg = tpfem::load_run_config(config_path);
    if (solve->parsed()) return tpfem::run_solve(cfg);
    if (table->parsed()) return tpfem::run_table(cfg);
    return tpfem::run_speedup(cfg, parse_thread_list(thread_list));
  } catch (const tpfem::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
