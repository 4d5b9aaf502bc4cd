#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "spinoct/qoct.hpp"

namespace spinoct {

struct PiScanParams {
  std::vector<double> lambda_t;
  std::vector<std::pair<int, int>> transitions;  // empty -> all adjacent pairs
  int samples_per_period = 40;
};

struct OptStateParams {
  std::string target = "state:7";
  std::string initial = "state:0";
  std::vector<double> lambda_t;  // per value: baseline schedule, t_f, and b_max
  double cutoff_ghz = 8.0;
  double stop_infidelity = 1e-7;
  int max_iterations = 1500;
  int max_restarts = 5;
  std::string seed_mode = "resonant";
  int samples_per_period = 40;
};

struct OptGateParams {
  std::string target = "deutsch:pi/4";
  double b_max_t = 0.020;
  std::optional<double> t_f_ns;  // absent -> 20x the longest drift period
  double cutoff_ghz = 8.0;
  double stop_fidelity = 0.99;
  int max_iterations = 2000;
  int max_restarts = 5;
  std::string seed_mode = "random";
  int samples_per_period = 40;
};

struct FrontierParams {
  std::string target = "deutsch:pi/2";
  std::vector<double> t_f_ns;
  double threshold = 0.99;
  double b_hi_t = 0.05;
  double bisect_rel_tol = 0.15;
  double bisect_abs_tol_t = 1e-4;
  double cutoff_ghz = 8.0;
  int max_iterations = 800;
  int max_restarts = 2;
  std::string seed_mode = "random";
  int samples_per_period = 40;
};

using ScenarioParams =
    std::variant<PiScanParams, OptStateParams, OptGateParams, FrontierParams>;

struct ExperimentConfig {
  SpinSystem system;
  std::string scenario;  // pi-scan | opt-state | opt-gate | frontier
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  ScenarioParams params;
  std::uint64_t config_hash = 0;
};

/// Parses the JSON config; unknown keys anywhere are errors (fail-fast).
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunContext {
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct PiScanRow {
  int lower = 0, upper = 0;
  double lambda_t = 0.0, t_pi_ns = 0.0, infidelity = 0.0;
};

struct OptStateRow {
  double t_f_ns = 0.0;
  double baseline_infidelity = 0.0;
  double qoct_infidelity = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  double b_max_t = 0.0;
  std::string termination;
};

struct OptGateOutcome {
  double t_f_ns = 0.0;
  int cutoff_index = 0;
  OptimizationResult result;
};

std::vector<PiScanRow> run_pi_scan(const ExperimentConfig& config, const RunContext& ctx);
std::vector<OptStateRow> run_opt_state(const ExperimentConfig& config, const RunContext& ctx);
OptGateOutcome run_opt_gate(const ExperimentConfig& config, const RunContext& ctx);
std::vector<FrontierPoint> run_frontier(const ExperimentConfig& config, const RunContext& ctx);

/// Dispatches on config.scenario and writes all output files.
void run_scenario(const ExperimentConfig& config, const RunContext& ctx);

/// Startup convergence check: propagates a representative pulse on the rule
/// grid and on a doubled grid; returns the max entrywise difference of the
/// final unitaries.
double grid_halving_defect(const Propagator& propagator, const Pulse& pulse,
                           const TimeGrid& grid);

}  // namespace spinoct
