// mlpsched: run MLP-aware scheduling experiments from a JSON config.
//
//   mlpsched simulate     --config exp.json --out results/
//   mlpsched compare      --config exp.json --out results/
//   mlpsched sweep        --config exp.json --out results/
//   mlpsched oracle-check --config exp.json
//
// Exit codes: 0 success, 2 config/validation error, 1 anything else.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mlpsched/experiment.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = "results";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Options& opt, bool needs_out) {
  cmd->add_option("--config", opt.config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  if (needs_out) {
    cmd->add_option("--out", opt.out, "Output directory")
        ->capture_default_str();
  }
  cmd->add_option("--seed", opt.seed, "Override the config seed");
  cmd->add_flag("--quiet", opt.quiet, "Suppress progress messages");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MLP-aware thread scheduling simulator"};
  app.require_subcommand(1);
  Options opt;
  auto* simulate = app.add_subcommand("simulate", "Run each listed policy");
  auto* compare =
      app.add_subcommand("compare", "Run policies side by side with speedups");
  auto* sweep =
      app.add_subcommand("sweep", "Cartesian sweep over config parameters");
  auto* oracle = app.add_subcommand(
      "oracle-check", "Compare serpentine against the exhaustive optimum");
  add_common(simulate, opt, true);
  add_common(compare, opt, true);
  add_common(sweep, opt, true);
  add_common(oracle, opt, false);

  CLI11_PARSE(app, argc, argv);

  try {
    mlpsched::ExperimentConfig cfg = mlpsched::load_experiment_config(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;

    auto log = [&](const std::string& msg) {
      if (!opt.quiet) std::cerr << msg << '\n';
    };
    if (simulate->parsed()) {
      mlpsched::cmd_simulate(cfg, opt.out);
      log("wrote quanta.csv, processors.csv, summary.json to " + opt.out);
    } else if (compare->parsed()) {
      mlpsched::cmd_compare(cfg, opt.out);
      log("wrote comparison.csv, quanta.csv, processors.csv, summary.json to " +
          opt.out);
    } else if (sweep->parsed()) {
      mlpsched::cmd_sweep(cfg, opt.out);
      log("wrote sweep.csv, summary.json to " + opt.out);
    } else if (oracle->parsed()) {
      mlpsched::cmd_oracle_check(cfg, std::cout);
    }
  } catch (const mlpsched::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
