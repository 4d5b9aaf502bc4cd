#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinoct/propagation.hpp"
#include "spinoct/pulse.hpp"
#include "spinoct/spin_model.hpp"
#include "spinoct/targets.hpp"

namespace spinoct {

/// F = |Tr(U+ U_target) / d|^2, invariant under a global phase of either side.
double gate_fidelity(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& u_target);

/// |<target|psi>|^2.
double state_fidelity(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& target);

enum class SeedMode { random, resonant };

/// Specification of one constrained pulse optimization.
struct ControlProblem {
  SpinSystem system;
  double t_f_ns = 10.0;
  int cutoff_index = 8;                 // K; mode spacing is 1/t_f GHz
  TargetSpec target = GateTarget{};
  Eigen::VectorXcd initial_state;       // state targets only; empty selects |0>
  double b_max_t = 0.02;                // per-term peak bound |2u/sqrt(t_f)| <= b_max
  double stop_fidelity = 0.99;
  double gradient_tolerance = 1e-9;
  int max_iterations = 2000;
  int max_restarts = 5;
  std::uint64_t seed = 1;
  SeedMode seed_mode = SeedMode::random;
  int samples_per_period = 40;

  /// Throws on invalid bounds; warns (stderr) when the Fourier cutoff K/t_f
  /// lies below the largest drivable adjacent transition frequency.
  void validate(const SpectralData& spectral) const;
};

struct IterationRecord {
  int iteration = 0;
  double fidelity = 0.0;
  double gradient_norm = 0.0;
  int restart = 0;
};

struct OptimizationResult {
  Eigen::VectorXd coefficients;   // full (u_0 .. u_{2K}), constraints satisfied
  double fidelity = 0.0;
  std::vector<IterationRecord> history;
  long function_evaluations = 0;
  long gradient_evaluations = 0;
  std::string termination;        // fidelity_threshold | gradient_norm | max_iterations | stalled
  int restarts_used = 0;
  std::uint64_t seed = 0;
};

/// Objective evaluation for a fixed problem: caches the spectral data, the
/// propagator, the time grid, and the Fourier transforms. Coefficient
/// vectors are the full (2K+1)-long u; the gradient is the exact derivative
/// of the discrete propagation (adjoint sweep + basis projection).
class FidelityModel {
 public:
  explicit FidelityModel(const ControlProblem& problem);
  ~FidelityModel();
  FidelityModel(const FidelityModel&) = delete;
  FidelityModel& operator=(const FidelityModel&) = delete;

  double fidelity(const Eigen::VectorXd& u) const;
  double fidelity_and_gradient(const Eigen::VectorXd& u, Eigen::VectorXd& grad_u) const;

  const TimeGrid& grid() const;
  const SpectralData& spectral() const;
  const Propagator& propagator() const;
  int n_coefficients() const;
  FourierPulse pulse_from(const Eigen::VectorXd& u, bool constrained = false) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// dG/du for a gate problem (full coefficient coordinates, no constraints
/// applied; matches central finite differences of the discrete objective).
Eigen::VectorXd gate_gradient(const ControlProblem& problem, const Eigen::VectorXd& u);
/// Same for a state-transfer problem.
Eigen::VectorXd state_gradient(const ControlProblem& problem, const Eigen::VectorXd& u);

/// Projected quasi-Newton ascent of the fidelity under the equality
/// constraints (u_0 = 0, sum of cosine coefficients = 0, eliminated by
/// reparameterization) and the per-term box bounds (projection with a
/// bound-respecting backtracking arc search). Deterministic for a fixed seed.
OptimizationResult optimize(const ControlProblem& problem);

struct FrontierOptions {
  double b_hi_t = 0.05;        // upper bracket for the bisection
  double rel_tol = 0.15;       // stop when hi - lo <= max(rel_tol*hi, abs_tol)
  double abs_tol_t = 1e-4;
  double cutoff_ghz = 8.0;     // K = floor(cutoff * t_f) per time point
};

struct FrontierPoint {
  double t_f_ns = 0.0;
  double min_bmax_t = 0.0;
  int bisection_iters = 0;
  bool feasible = false;       // threshold reachable at b_hi
  bool verified = false;       // independent re-run reached the threshold
  double fidelity = 0.0;       // fidelity of the accepted run at min_bmax
};

/// Minimal amplitude bound reaching `threshold` for each total time, by
/// bisection over b_max with one optimization per probe.
std::vector<FrontierPoint> amplitude_frontier(const ControlProblem& prototype,
                                              const GateTarget& gate,
                                              std::span<const double> times_ns,
                                              double threshold,
                                              const FrontierOptions& opts = {});

}  // namespace spinoct
