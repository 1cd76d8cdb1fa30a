// Command-line front end: run, verify and sweep experiments from JSON configs.

#include "uan/experiment/config.hpp"
#include "uan/experiment/runner.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>

namespace ex = uan::experiment;

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_iters;
  std::string out = ".";
  bool quiet = false;
  unsigned jobs = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "Experiment config (JSON)");
  cmd->add_option("--preset", c.preset, "Use a built-in preset instead of a config file");
  cmd->add_option("--seed", c.seed, "Override the config seed");
  cmd->add_option("--max-iters", c.max_iters, "Override stop.max_iters");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_flag("--quiet,-q", c.quiet, "Only report errors");
}

ex::ExperimentConfig load(const Common& c) {
  if (c.config.empty() == c.preset.empty()) {
    throw ex::ConfigError("give exactly one of a config path or --preset");
  }
  ex::json j;
  if (!c.preset.empty()) {
    j = ex::preset(c.preset);
  } else {
    j = ex::to_json(ex::load_config(c.config));
  }
  if (c.seed) j["seed"] = *c.seed;
  if (c.max_iters) j["stop"]["max_iters"] = *c.max_iters;
  return ex::config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Union averaged nonexpansive operators: fixed-point experiments"};
  app.require_subcommand(1);

  Common run_opts;
  Common verify_opts;
  Common sweep_opts;
  auto* run = app.add_subcommand("run", "Run an experiment and write its trace");
  add_common(run, run_opts);
  auto* verify = app.add_subcommand("verify", "Run the oracle suite on the configured operator");
  add_common(verify, verify_opts);
  auto* sweep = app.add_subcommand("sweep", "Run a grid of starting points and count basins");
  add_common(sweep, sweep_opts);
  sweep->add_option("--jobs,-j", sweep_opts.jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string show_name;
  auto* presets = app.add_subcommand("presets", "List built-in presets or print one");
  presets->add_option("--show", show_name, "Print the full config of a preset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets->parsed()) {
      if (!show_name.empty()) {
        std::cout << ex::preset(show_name).dump(2) << "\n";
      } else {
        for (const auto& n : ex::preset_names()) std::cout << n << "\n";
      }
      return 0;
    }
    const Common& c = run->parsed() ? run_opts : verify->parsed() ? verify_opts : sweep_opts;
    const ex::ExperimentConfig config = load(c);
    ex::RunOptions options;
    options.out_dir = c.out;
    options.quiet = c.quiet;
    options.jobs = c.jobs;
    if (run->parsed()) return ex::run_experiment(config, options, std::cout);
    if (verify->parsed()) return ex::verify_experiment(config, options, std::cout);
    return ex::sweep_experiment(config, options, std::cout);
  } catch (const ex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ex::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::kExitConfigError;
  }
}
