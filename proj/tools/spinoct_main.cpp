#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spinoct/errors.hpp"
#include "spinoct/experiments.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", args.seed, "random seed (overrides config)")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--jobs", args.jobs, "worker threads for independent rows")
      ->check(CLI::PositiveNumber);
}

int run(const std::string& scenario, const CommonArgs& args) {
  spinoct::ExperimentConfig config = spinoct::load_config(args.config_path);
  if (config.scenario != scenario)
    throw spinoct::ConfigError("config declares scenario '" + config.scenario +
                               "' but subcommand is '" + scenario + "'");
  spinoct::RunContext ctx;
  ctx.out_dir = args.out_dir.empty() ? config.output_dir
                                     : std::filesystem::path(args.out_dir);
  ctx.seed = args.seed_set ? args.seed : config.seed;
  ctx.jobs = args.jobs;
  spinoct::run_scenario(config, ctx);
  std::cout << "wrote results to " << ctx.out_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinoct: spin-qudit optimal control experiments"};
  app.require_subcommand(1);

  CommonArgs args[4];
  const char* names[4] = {"pi-scan", "opt-state", "opt-gate", "frontier"};
  const char* blurbs[4] = {
      "infidelity of resonant pi pulses vs duration",
      "optimized state transfer vs monochromatic baseline",
      "synthesize a target gate with a shaped pulse",
      "minimal amplitude bound vs operation time"};
  CLI::App* cmds[4];
  for (int i = 0; i < 4; ++i) {
    cmds[i] = app.add_subcommand(names[i], blurbs[i]);
    add_common(cmds[i], args[i]);
  }

  try {
    app.parse(argc, argv);
    for (int i = 0; i < 4; ++i)
      if (cmds[i]->parsed()) return run(names[i], args[i]);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const spinoct::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const spinoct::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
