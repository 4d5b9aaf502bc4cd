#include "spinoct/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "spinoct/analytic_rwa.hpp"
#include "spinoct/constants.hpp"
#include "spinoct/errors.hpp"
#include "spinoct/util.hpp"

namespace spinoct {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key))
    throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

template <typename T>
T optional_or(const json& obj, const std::string& where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

Eigen::Vector3d parse_vec3(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() != 3)
    throw ConfigError(where + " must be a 3-vector");
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!arr[i].is_number()) throw ConfigError(where + " must be numeric");
    v(i) = arr[i].get<double>();
  }
  return v;
}

SpinSystem parse_system(const json& obj) {
  check_keys(obj, "system", {"spin", "g", "D_MHz", "E_MHz", "B_T", "b_dir"});
  SpinSystem sys;
  sys.spin = require<double>(obj, "system", "spin");
  sys.g_factor = require<double>(obj, "system", "g");
  sys.zfs_d_mhz = require<double>(obj, "system", "D_MHz");
  sys.zfs_e_mhz = require<double>(obj, "system", "E_MHz");
  sys.static_field_t = parse_vec3(obj.at("B_T"), "system.B_T");
  sys.drive_direction = parse_vec3(obj.at("b_dir"), "system.b_dir");
  try {
    sys.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid system block: ") + e.what());
  }
  return sys;
}

SeedMode parse_seed_mode(const std::string& mode) {
  if (mode == "random") return SeedMode::random;
  if (mode == "resonant") return SeedMode::resonant;
  throw ConfigError("seed_mode must be 'random' or 'resonant', got '" + mode + "'");
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string hex64(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

int cutoff_index_for(double cutoff_ghz, double t_f_ns) {
  const int k = static_cast<int>(std::floor(cutoff_ghz * t_f_ns));
  if (k < 1)
    throw ConfigError("cutoff " + std::to_string(cutoff_ghz) +
                      " GHz gives K < 1 at t_f = " + std::to_string(t_f_ns) + " ns");
  return k;
}

int basis_index_of(const StateTarget& target) {
  for (int j = 0; j < target.dimension(); ++j)
    if (std::abs(target.state(j) - std::complex<double>(1.0, 0.0)) < 1e-12) {
      bool pure = true;
      for (int i = 0; i < target.dimension(); ++i)
        if (i != j && std::abs(target.state(i)) > 1e-12) pure = false;
      if (pure) return j;
    }
  return -1;
}

json result_to_json(const OptimizationResult& result, double t_f_ns, int cutoff_index,
                    double b_max_t, std::uint64_t config_hash) {
  json doc;
  doc["fidelity"] = result.fidelity;
  doc["infidelity"] = 1.0 - result.fidelity;
  doc["termination"] = result.termination;
  doc["restarts_used"] = result.restarts_used;
  doc["seed"] = result.seed;
  doc["config_hash"] = hex64(config_hash);
  doc["t_f_ns"] = t_f_ns;
  doc["cutoff_index"] = cutoff_index;
  doc["b_max_T"] = b_max_t;
  doc["function_evaluations"] = result.function_evaluations;
  doc["gradient_evaluations"] = result.gradient_evaluations;
  doc["coefficients"] = std::vector<double>(
      result.coefficients.data(), result.coefficients.data() + result.coefficients.size());
  json hist = json::array();
  for (const auto& rec : result.history)
    hist.push_back({rec.iteration, rec.fidelity, rec.gradient_norm, rec.restart});
  doc["history"] = hist;
  return doc;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");

  ExperimentConfig config;
  config.scenario = require<std::string>(doc, "config", "scenario");
  if (!doc.contains("system")) throw ConfigError("missing 'system' block");
  config.system = parse_system(doc.at("system"));
  config.seed = optional_or<std::uint64_t>(doc, "config", "seed", 1);
  config.output_dir = optional_or<std::string>(doc, "config", "output_dir", "out");
  config.config_hash = fnv1a_hash(doc.dump());

  const std::initializer_list<const char*> common = {"system", "scenario", "seed",
                                                     "output_dir"};
  if (config.scenario == "pi-scan") {
    check_keys(doc, "config",
               {"system", "scenario", "seed", "output_dir", "lambda_T", "transitions",
                "steps_per_period"});
    PiScanParams p;
    p.lambda_t = require<std::vector<double>>(doc, "pi-scan", "lambda_T");
    if (doc.contains("transitions")) {
      for (const auto& pair : doc.at("transitions")) {
        if (!pair.is_array() || pair.size() != 2)
          throw ConfigError("transitions must be [lower, upper] pairs");
        p.transitions.emplace_back(pair[0].get<int>(), pair[1].get<int>());
      }
    }
    p.samples_per_period = optional_or<int>(doc, "pi-scan", "steps_per_period", 40);
    config.params = p;
  } else if (config.scenario == "opt-state") {
    check_keys(doc, "config",
               {"system", "scenario", "seed", "output_dir", "target", "initial",
                "lambda_T", "cutoff_GHz", "stop_infidelity", "max_iterations",
                "max_restarts", "seed_mode", "steps_per_period"});
    OptStateParams p;
    p.target = require<std::string>(doc, "opt-state", "target");
    p.initial = optional_or<std::string>(doc, "opt-state", "initial", "state:0");
    p.lambda_t = require<std::vector<double>>(doc, "opt-state", "lambda_T");
    p.cutoff_ghz = optional_or<double>(doc, "opt-state", "cutoff_GHz", 8.0);
    p.stop_infidelity = optional_or<double>(doc, "opt-state", "stop_infidelity", 1e-7);
    p.max_iterations = optional_or<int>(doc, "opt-state", "max_iterations", 1500);
    p.max_restarts = optional_or<int>(doc, "opt-state", "max_restarts", 5);
    p.seed_mode = optional_or<std::string>(doc, "opt-state", "seed_mode", "resonant");
    p.samples_per_period = optional_or<int>(doc, "opt-state", "steps_per_period", 40);
    config.params = p;
  } else if (config.scenario == "opt-gate") {
    check_keys(doc, "config",
               {"system", "scenario", "seed", "output_dir", "target", "b_max_T",
                "t_f_ns", "cutoff_GHz", "stop_fidelity", "max_iterations",
                "max_restarts", "seed_mode", "steps_per_period"});
    OptGateParams p;
    p.target = optional_or<std::string>(doc, "opt-gate", "target", "deutsch:pi/4");
    p.b_max_t = optional_or<double>(doc, "opt-gate", "b_max_T", 0.020);
    if (doc.contains("t_f_ns")) p.t_f_ns = doc.at("t_f_ns").get<double>();
    p.cutoff_ghz = optional_or<double>(doc, "opt-gate", "cutoff_GHz", 8.0);
    p.stop_fidelity = optional_or<double>(doc, "opt-gate", "stop_fidelity", 0.99);
    p.max_iterations = optional_or<int>(doc, "opt-gate", "max_iterations", 2000);
    p.max_restarts = optional_or<int>(doc, "opt-gate", "max_restarts", 5);
    p.seed_mode = optional_or<std::string>(doc, "opt-gate", "seed_mode", "random");
    p.samples_per_period = optional_or<int>(doc, "opt-gate", "steps_per_period", 40);
    config.params = p;
  } else if (config.scenario == "frontier") {
    check_keys(doc, "config",
               {"system", "scenario", "seed", "output_dir", "target", "t_f_ns",
                "threshold", "b_hi_T", "bisect_rel_tol", "bisect_abs_tol_T",
                "cutoff_GHz", "max_iterations", "max_restarts", "seed_mode",
                "steps_per_period"});
    FrontierParams p;
    p.target = optional_or<std::string>(doc, "frontier", "target", "deutsch:pi/2");
    p.t_f_ns = require<std::vector<double>>(doc, "frontier", "t_f_ns");
    p.threshold = optional_or<double>(doc, "frontier", "threshold", 0.99);
    p.b_hi_t = optional_or<double>(doc, "frontier", "b_hi_T", 0.05);
    p.bisect_rel_tol = optional_or<double>(doc, "frontier", "bisect_rel_tol", 0.15);
    p.bisect_abs_tol_t = optional_or<double>(doc, "frontier", "bisect_abs_tol_T", 1e-4);
    p.cutoff_ghz = optional_or<double>(doc, "frontier", "cutoff_GHz", 8.0);
    p.max_iterations = optional_or<int>(doc, "frontier", "max_iterations", 800);
    p.max_restarts = optional_or<int>(doc, "frontier", "max_restarts", 2);
    p.seed_mode = optional_or<std::string>(doc, "frontier", "seed_mode", "random");
    p.samples_per_period = optional_or<int>(doc, "frontier", "steps_per_period", 40);
    config.params = p;
  } else {
    (void)common;
    throw ConfigError("unknown scenario '" + config.scenario +
                      "' (expected pi-scan, opt-state, opt-gate, frontier)");
  }
  return config;
}

double grid_halving_defect(const Propagator& propagator, const Pulse& pulse,
                           const TimeGrid& grid) {
  PropagationOptions opts;
  opts.enforce_step_rule = false;
  const Eigen::MatrixXcd coarse =
      propagator.propagate_unitary(pulse, grid, Frame::interaction, opts).final_unitary;
  const TimeGrid fine{grid.t_f_ns, 2 * grid.n_steps};
  const Eigen::MatrixXcd refined =
      propagator.propagate_unitary(pulse, fine, Frame::interaction, opts).final_unitary;
  return (coarse - refined).cwiseAbs().maxCoeff();
}

namespace {

// Doubles the step density until a halving no longer moves the final
// unitary; returns the samples-per-period factor to use.
int calibrated_steps_per_period(const Propagator& propagator, const Pulse& pulse,
                                double t_f_ns, int spp0, double tolerance,
                                double* defect_out) {
  int spp = spp0;
  for (;;) {
    const TimeGrid grid =
        TimeGrid::with_step_rule(t_f_ns, propagator.nu_max_ghz(pulse), spp);
    const double defect = grid_halving_defect(propagator, pulse, grid);
    if (defect_out) *defect_out = defect;
    if (defect <= tolerance || spp >= 4 * spp0) {
      if (defect > tolerance)
        throw NumericalError("grid convergence check failed: halving defect " +
                             std::to_string(defect) + " at " + std::to_string(spp) +
                             " samples per period");
      if (spp != spp0)
        std::cerr << "note: step density raised to " << spp
                  << " samples per period (halving defect " << defect << ")\n";
      return spp;
    }
    spp *= 2;
  }
}

std::vector<PiScanRow> do_pi_scan(const ExperimentConfig& config, const RunContext& ctx,
                                  json* meta) {
  const auto& params = std::get<PiScanParams>(config.params);
  config.system.validate();
  const SpectralData spectral = system_spectrum(config.system);
  const Propagator propagator(spectral, config.system.g_factor);
  const int d = spectral.dimension();

  std::vector<std::pair<int, int>> transitions = params.transitions;
  if (transitions.empty())
    for (int j = 0; j + 1 < d; ++j) transitions.emplace_back(j, j + 1);
  for (const auto& [j, k] : transitions)
    if (j < 0 || k >= d || j >= k)
      throw ConfigError("invalid transition (" + std::to_string(j) + "," +
                        std::to_string(k) + ")");

  if (params.lambda_t.empty()) return {};

  int spp = params.samples_per_period;
  {
    // Convergence check on the slowest point (longest pi pulse).
    double lambda_min = params.lambda_t.front();
    for (double l : params.lambda_t) lambda_min = std::min(lambda_min, l);
    double mu_min = std::numeric_limits<double>::infinity();
    std::pair<int, int> slowest = transitions.front();
    for (const auto& [j, k] : transitions) {
      const double mu = std::abs(spectral.transition_elements(j, k));
      if (mu < mu_min) {
        mu_min = mu;
        slowest = {j, k};
      }
    }
    const auto spec = make_rotation(slowest.first, slowest.second, kPi, RotationAxis::x,
                                    spectral.transition_elements(slowest.first, slowest.second));
    const MonochromaticPulse probe =
        monochromatic_for(spec, lambda_min, spectral, config.system.g_factor);
    double defect = 0.0;
    spp = calibrated_steps_per_period(propagator, probe, probe.duration_ns(), spp,
                                      1e-8, &defect);
    if (meta) (*meta)["grid_check"] = {{"samples_per_period", spp}, {"halving_defect", defect}};
  }

  const int n_rows = static_cast<int>(transitions.size() * params.lambda_t.size());
  std::vector<PiScanRow> rows(n_rows);
  parallel_for(n_rows, ctx.jobs, [&](int idx) {
    const auto& [j, k] = transitions[idx / params.lambda_t.size()];
    const double lambda = params.lambda_t[idx % params.lambda_t.size()];
    try {
      const auto spec =
          make_rotation(j, k, kPi, RotationAxis::x, spectral.transition_elements(j, k));
      const MonochromaticPulse pulse =
          monochromatic_for(spec, lambda, spectral, config.system.g_factor);
      const double t_pi = pulse.duration_ns();
      const TimeGrid grid =
          TimeGrid::with_step_rule(t_pi, propagator.nu_max_ghz(pulse), spp);
      const Eigen::VectorXcd psi =
          propagator.propagate_state(pulse, grid, basis_state(j, d).state);
      if (std::abs(psi.norm() - 1.0) > 1e-8)
        throw NumericalError("propagated state norm drifted");
      rows[idx] = {j, k, lambda, t_pi,
                   1.0 - state_fidelity(psi, basis_state(k, d).state)};
    } catch (const std::exception& e) {
      throw NumericalError("pi-scan failed at transition (" + std::to_string(j) + "," +
                           std::to_string(k) + "), lambda = " + format_double(lambda) +
                           " T: " + e.what());
    }
  });

  std::sort(rows.begin(), rows.end(), [](const PiScanRow& a, const PiScanRow& b) {
    return std::tie(a.lower, a.upper, a.lambda_t) < std::tie(b.lower, b.upper, b.lambda_t);
  });
  return rows;
}

struct OptStateArtifacts {
  std::vector<OptStateRow> rows;
  std::vector<OptimizationResult> results;  // aligned with rows
  std::vector<int> cutoffs;
};

OptStateArtifacts do_opt_state(const ExperimentConfig& config, const RunContext& ctx,
                               json* meta) {
  const auto& params = std::get<OptStateParams>(config.params);
  config.system.validate();
  const SpectralData spectral = system_spectrum(config.system);
  const Propagator propagator(spectral, config.system.g_factor);
  const int d = spectral.dimension();

  const TargetSpec target_spec = parse_target(params.target, d);
  if (is_gate_target(target_spec))
    throw ConfigError("opt-state requires a state target, got '" + params.target + "'");
  const StateTarget target = std::get<StateTarget>(target_spec);

  const TargetSpec initial_spec = parse_target(params.initial, d);
  if (is_gate_target(initial_spec))
    throw ConfigError("initial must be a basis state, got '" + params.initial + "'");
  const StateTarget initial = std::get<StateTarget>(initial_spec);
  const int j_init = basis_index_of(initial);
  if (j_init < 0)
    throw ConfigError("initial must be a basis state, got '" + params.initial + "'");

  std::vector<RotationSpec> sequence;
  if (target.label == "ghz07") {
    if (j_init != 0) throw ConfigError("ghz07 target requires initial state:0");
    sequence = superposition_sequence(spectral);
  } else {
    const int j_target = basis_index_of(target);
    if (j_target < 0 || j_target == j_init)
      throw ConfigError("opt-state target must differ from the initial basis state");
    sequence = ladder_pi_sequence(j_init, j_target, spectral);
  }

  if (params.lambda_t.empty()) return {};

  int spp = params.samples_per_period;
  {
    double lambda_min = params.lambda_t.front();
    for (double l : params.lambda_t) lambda_min = std::min(lambda_min, l);
    const PulseSchedule probe =
        sequence_pulse_schedule(sequence, lambda_min, spectral, config.system.g_factor);
    double defect = 0.0;
    spp = calibrated_steps_per_period(propagator, probe, probe.duration_ns(), spp,
                                      1e-8, &defect);
    if (meta) (*meta)["grid_check"] = {{"samples_per_period", spp}, {"halving_defect", defect}};
  }

  const int n_rows = static_cast<int>(params.lambda_t.size());
  OptStateArtifacts artifacts;
  artifacts.rows.resize(n_rows);
  artifacts.results.resize(n_rows);
  artifacts.cutoffs.resize(n_rows);

  parallel_for(n_rows, ctx.jobs, [&](int idx) {
    const double lambda = params.lambda_t[idx];
    const PulseSchedule schedule =
        sequence_pulse_schedule(sequence, lambda, spectral, config.system.g_factor);
    const double t_f = schedule.duration_ns();

    const TimeGrid grid =
        TimeGrid::with_step_rule(t_f, propagator.nu_max_ghz(schedule), spp);
    const Eigen::VectorXcd psi =
        propagator.propagate_state(schedule, grid, initial.state);
    const double baseline_infid = 1.0 - state_fidelity(psi, target.state);

    ControlProblem problem;
    problem.system = config.system;
    problem.t_f_ns = t_f;
    problem.cutoff_index = cutoff_index_for(params.cutoff_ghz, t_f);
    problem.target = target;
    problem.initial_state = initial.state;
    problem.b_max_t = lambda;
    problem.stop_fidelity = 1.0 - params.stop_infidelity;
    problem.max_iterations = params.max_iterations;
    problem.max_restarts = params.max_restarts;
    problem.seed = mix_seed(ctx.seed, idx);
    problem.seed_mode = parse_seed_mode(params.seed_mode);
    problem.samples_per_period = spp;

    const OptimizationResult result = optimize(problem);
    artifacts.rows[idx] = {t_f,
                           baseline_infid,
                           1.0 - result.fidelity,
                           static_cast<int>(result.history.size()),
                           problem.seed,
                           lambda,
                           result.termination};
    artifacts.results[idx] = result;
    artifacts.cutoffs[idx] = problem.cutoff_index;
  });

  // Row order: ascending total time.
  std::vector<int> order(n_rows);
  for (int i = 0; i < n_rows; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return artifacts.rows[a].t_f_ns < artifacts.rows[b].t_f_ns;
  });
  OptStateArtifacts sorted;
  for (int i : order) {
    sorted.rows.push_back(artifacts.rows[i]);
    sorted.results.push_back(std::move(artifacts.results[i]));
    sorted.cutoffs.push_back(artifacts.cutoffs[i]);
  }
  return sorted;
}

OptGateOutcome do_opt_gate(const ExperimentConfig& config, const RunContext& ctx,
                           json* meta) {
  const auto& params = std::get<OptGateParams>(config.params);
  config.system.validate();
  const SpectralData spectral = system_spectrum(config.system);
  const Propagator propagator(spectral, config.system.g_factor);
  const int d = spectral.dimension();

  const TargetSpec target_spec = parse_target(params.target, d);
  if (!is_gate_target(target_spec))
    throw ConfigError("opt-gate requires a gate target, got '" + params.target + "'");

  // 20x the longest natural period of the drift unless overridden.
  const double t_f =
      params.t_f_ns ? *params.t_f_ns : 20.0 / spectral.min_adjacent_frequency();

  ControlProblem problem;
  problem.system = config.system;
  problem.t_f_ns = t_f;
  problem.cutoff_index = cutoff_index_for(params.cutoff_ghz, t_f);
  problem.target = std::get<GateTarget>(target_spec);
  problem.b_max_t = params.b_max_t;
  problem.stop_fidelity = params.stop_fidelity;
  problem.max_iterations = params.max_iterations;
  problem.max_restarts = params.max_restarts;
  problem.seed = mix_seed(ctx.seed, 0);
  problem.seed_mode = parse_seed_mode(params.seed_mode);
  problem.samples_per_period = params.samples_per_period;

  {
    // Convergence probe: box-scale amplitude on every resonant mode.
    const double bound = problem.b_max_t * std::sqrt(t_f) / 2.0;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * problem.cutoff_index + 1);
    for (int j = 0; j + 1 < d; ++j) {
      const double nu = spectral.transition_frequencies(j, j + 1);
      const int mode =
          std::clamp(static_cast<int>(std::lround(nu * t_f)), 1, problem.cutoff_index);
      u(2 * mode - 1) += 0.5 * bound;
    }
    const FourierPulse probe(t_f, problem.cutoff_index, u, false);
    double defect = 0.0;
    problem.samples_per_period = calibrated_steps_per_period(
        propagator, probe, t_f, problem.samples_per_period, 1e-8, &defect);
    if (meta)
      (*meta)["grid_check"] = {{"samples_per_period", problem.samples_per_period},
                               {"halving_defect", defect}};
  }

  OptGateOutcome outcome;
  outcome.t_f_ns = t_f;
  outcome.cutoff_index = problem.cutoff_index;
  outcome.result = optimize(problem);
  return outcome;
}

std::vector<FrontierPoint> do_frontier(const ExperimentConfig& config,
                                       const RunContext& ctx) {
  const auto& params = std::get<FrontierParams>(config.params);
  config.system.validate();
  const SpectralData spectral = system_spectrum(config.system);
  const int d = spectral.dimension();

  const TargetSpec target_spec = parse_target(params.target, d);
  if (!is_gate_target(target_spec))
    throw ConfigError("frontier requires a gate target, got '" + params.target + "'");
  const GateTarget gate = std::get<GateTarget>(target_spec);
  if (params.t_f_ns.empty()) throw ConfigError("frontier requires a t_f_ns list");

  FrontierOptions opts;
  opts.b_hi_t = params.b_hi_t;
  opts.rel_tol = params.bisect_rel_tol;
  opts.abs_tol_t = params.bisect_abs_tol_t;
  opts.cutoff_ghz = params.cutoff_ghz;

  const int n = static_cast<int>(params.t_f_ns.size());
  std::vector<FrontierPoint> points(n);
  parallel_for(n, ctx.jobs, [&](int idx) {
    ControlProblem prototype;
    prototype.system = config.system;
    prototype.stop_fidelity = params.threshold;
    prototype.max_iterations = params.max_iterations;
    prototype.max_restarts = params.max_restarts;
    prototype.seed = mix_seed(ctx.seed, idx);
    prototype.seed_mode = parse_seed_mode(params.seed_mode);
    prototype.samples_per_period = params.samples_per_period;
    const double t = params.t_f_ns[idx];
    points[idx] =
        amplitude_frontier(prototype, gate, std::span<const double>(&t, 1),
                           params.threshold, opts)
            .front();
  });
  std::sort(points.begin(), points.end(),
            [](const FrontierPoint& a, const FrontierPoint& b) { return a.t_f_ns < b.t_f_ns; });
  return points;
}

}  // namespace

std::vector<PiScanRow> run_pi_scan(const ExperimentConfig& config, const RunContext& ctx) {
  return do_pi_scan(config, ctx, nullptr);
}

std::vector<OptStateRow> run_opt_state(const ExperimentConfig& config,
                                       const RunContext& ctx) {
  return do_opt_state(config, ctx, nullptr).rows;
}

OptGateOutcome run_opt_gate(const ExperimentConfig& config, const RunContext& ctx) {
  return do_opt_gate(config, ctx, nullptr);
}

std::vector<FrontierPoint> run_frontier(const ExperimentConfig& config,
                                        const RunContext& ctx) {
  return do_frontier(config, ctx);
}

void run_scenario(const ExperimentConfig& config, const RunContext& ctx) {
  namespace fs = std::filesystem;
  fs::create_directories(ctx.out_dir);

  json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["config_hash"] = hex64(config.config_hash);
  manifest["scenario"] = config.scenario;
  manifest["seed"] = ctx.seed;
  manifest["jobs"] = ctx.jobs;
  manifest["started_utc"] = utc_now();
  std::vector<std::string> outputs;

  if (config.scenario == "pi-scan") {
    const auto rows = do_pi_scan(config, ctx, &manifest);
    std::ostringstream csv;
    csv << "transition,lambda_T,t_pi_ns,infidelity\n";
    for (const auto& r : rows)
      csv << r.lower << "-" << r.upper << "," << format_double(r.lambda_t) << ","
          << format_double(r.t_pi_ns) << "," << format_double(r.infidelity) << "\n";
    write_text_file(ctx.out_dir / "pi_scan.csv", csv.str());
    outputs.push_back("pi_scan.csv");
  } else if (config.scenario == "opt-state") {
    const auto artifacts = do_opt_state(config, ctx, &manifest);
    std::ostringstream csv;
    csv << "t_f_ns,baseline_infidelity,qoct_infidelity,iterations,seed\n";
    for (std::size_t i = 0; i < artifacts.rows.size(); ++i) {
      const auto& r = artifacts.rows[i];
      csv << format_double(r.t_f_ns) << "," << format_double(r.baseline_infidelity)
          << "," << format_double(r.qoct_infidelity) << "," << r.iterations << ","
          << r.seed << "\n";
      char tag[32];
      std::snprintf(tag, sizeof(tag), "%03zu", i);
      const auto& result = artifacts.results[i];
      const FourierPulse pulse(r.t_f_ns, artifacts.cutoffs[i], result.coefficients, false);
      write_pulse_file(ctx.out_dir / ("pulse_" + std::string(tag) + ".txt"), pulse);
      write_text_file(ctx.out_dir / ("result_" + std::string(tag) + ".json"),
                      result_to_json(result, r.t_f_ns, artifacts.cutoffs[i], r.b_max_t,
                                     config.config_hash)
                              .dump(2) +
                          "\n");
      outputs.push_back("pulse_" + std::string(tag) + ".txt");
      outputs.push_back("result_" + std::string(tag) + ".json");
    }
    write_text_file(ctx.out_dir / "opt_state.csv", csv.str());
    outputs.push_back("opt_state.csv");
  } else if (config.scenario == "opt-gate") {
    const auto outcome = do_opt_gate(config, ctx, &manifest);
    const auto& params = std::get<OptGateParams>(config.params);
    const FourierPulse pulse(outcome.t_f_ns, outcome.cutoff_index,
                             outcome.result.coefficients, false);
    write_pulse_file(ctx.out_dir / "pulse.txt", pulse);
    std::ostringstream spectrum;
    spectrum << "frequency_GHz,power\n";
    for (const auto& [nu, power] : power_spectrum(pulse))
      spectrum << format_double(nu) << "," << format_double(power) << "\n";
    write_text_file(ctx.out_dir / "spectrum.csv", spectrum.str());
    write_text_file(ctx.out_dir / "result.json",
                    result_to_json(outcome.result, outcome.t_f_ns, outcome.cutoff_index,
                                   params.b_max_t, config.config_hash)
                            .dump(2) +
                        "\n");
    outputs.insert(outputs.end(), {"pulse.txt", "spectrum.csv", "result.json"});
    manifest["fidelity"] = outcome.result.fidelity;
    manifest["t_f_ns"] = outcome.t_f_ns;
  } else if (config.scenario == "frontier") {
    const auto points = do_frontier(config, ctx);
    std::ostringstream csv;
    csv << "t_f_ns,min_bmax_T,bisection_iters\n";
    json verification = json::array();
    for (const auto& p : points) {
      csv << format_double(p.t_f_ns) << "," << format_double(p.min_bmax_t) << ","
          << p.bisection_iters << "\n";
      verification.push_back({{"t_f_ns", p.t_f_ns},
                              {"feasible", p.feasible},
                              {"verified", p.verified},
                              {"fidelity", p.fidelity}});
    }
    write_text_file(ctx.out_dir / "frontier.csv", csv.str());
    outputs.push_back("frontier.csv");
    manifest["verification"] = verification;
  } else {
    throw ConfigError("unknown scenario '" + config.scenario + "'");
  }

  manifest["outputs"] = outputs;
  manifest["finished_utc"] = utc_now();
  write_text_file(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace spinoct
