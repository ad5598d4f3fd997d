#include <CLI11.hpp>

#include <iostream>

#include "rieszlab/experiment.hpp"

namespace {

// Exit codes: 0 every audited invariant passed, 1 an audit failed,
// 2 bad input (schema, lookup, parse or usage).
constexpr int kAuditFailed = 1;
constexpr int kBadInput = 2;

int run(const std::string& config, const rieszlab::ConfigOverrides& overrides, bool quiet) {
  auto c = rieszlab::load_config(config);
  rieszlab::apply_overrides(c, overrides);
  const auto report = rieszlab::run_experiment(c);
  const auto paths = rieszlab::write_report(report, c);
  if (!quiet) {
    std::cout << "experiment " << report.experiment << " (" << report.module << ")\n"
              << "  json " << paths.json.string() << "\n"
              << "  csv  " << paths.csv.string() << " (" << report.table.rows.size() << " rows)\n";
  }
  if (report.passed()) {
    std::cout << "PASS " << report.experiment << "\n";
    return 0;
  }
  std::cout << "FAIL " << report.experiment << "\n";
  for (const auto& f : report.failures) std::cerr << "failing clause: " << f << "\n";
  return kAuditFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rieszlab: convergence structures, Riesz-space integrals and Mellin operators"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run an experiment from a JSON config and write <stem>.json and <stem>.csv");
  std::string config;
  rieszlab::ConfigOverrides overrides;
  std::string out_dir;
  std::uint64_t seed = 0;
  long resolution = 0, horizon = 0;
  bool quiet = false;
  run_cmd->add_option("config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the RNG seed");
  auto* res_opt = run_cmd->add_option("--resolution", resolution, "Override the quadrature resolution")
                      ->check(CLI::Range(16L, 1L << 30));
  auto* hor_opt = run_cmd->add_option("--horizon", horizon, "Override the convergence-structure horizon N")
                      ->check(CLI::PositiveNumber);
  auto* out_opt = run_cmd->add_option("--out-dir", out_dir, "Override the output directory");
  run_cmd->add_flag("-q,--quiet", quiet, "Print only the PASS/FAIL line");

  auto* list_cmd = app.add_subcommand("list-fixtures", "List fixture ids, modules and anchors");
  std::string module;
  list_cmd->add_option("--module", module, "Restrict to one module");

  auto* exp_cmd = app.add_subcommand("list-experiments", "List experiment ids and their modules");

  auto* plot_cmd = app.add_subcommand("plot-data", "Print a report's plot series as long-format CSV");
  std::string report_file;
  plot_cmd->add_option("report", report_file, "Report JSON written by run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kBadInput;
  }

  try {
    if (*run_cmd) {
      if (*seed_opt) overrides.seed = seed;
      if (*res_opt) overrides.resolution = resolution;
      if (*hor_opt) overrides.horizon = horizon;
      if (*out_opt) overrides.out_dir = out_dir;
      return run(config, overrides, quiet);
    }
    if (*list_cmd) {
      rieszlab::list_fixtures(rieszlab::standard_fixtures(), std::cout, module);
      return 0;
    }
    if (*exp_cmd) {
      for (const auto& [id, mod] : rieszlab::experiment_catalog()) std::cout << id << '\t' << mod << '\n';
      return 0;
    }
    if (*plot_cmd) {
      rieszlab::emit_plot_data(std::filesystem::path(report_file), std::cout);
      return 0;
    }
  } catch (const rieszlab::SchemaError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return kBadInput;
  } catch (const rieszlab::LookupError& e) {
    std::cerr << "lookup error: " << e.what() << "\n";
    return kBadInput;
  } catch (const rieszlab::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return 0;
}
