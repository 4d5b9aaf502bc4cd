#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "spinoct/pulse.hpp"
#include "spinoct/spin_model.hpp"

namespace spinoct {

/// Uniform time grid on [0, t_f].
struct TimeGrid {
  double t_f_ns = 0.0;
  int n_steps = 0;

  double step_ns() const { return t_f_ns / n_steps; }
  void validate() const;
  bool operator==(const TimeGrid&) const = default;

  /// Grid resolving the fastest frequency: h <= 1 / (samples_per_period * nu_max),
  /// with the step count rounded up to an FFT-friendly size.
  static TimeGrid with_step_rule(double t_f_ns, double nu_max_ghz,
                                 int samples_per_period = 40);
};

/// Step count with_step_rule would demand for the given parameters.
int required_steps(double t_f_ns, double nu_max_ghz, int samples_per_period = 40);

enum class Frame { interaction, lab };

struct PropagationOptions {
  bool enforce_step_rule = true;
  bool store_nodes = false;
  int samples_per_period = 40;
};

/// Result of a unitary (or costate) propagation. Stored node matrices, when
/// requested, are at grid nodes t_i = i h, i = 0..N.
struct EvolutionTrace {
  TimeGrid grid;
  Eigen::MatrixXcd final_unitary;
  std::vector<Eigen::MatrixXcd> node_unitaries;

  /// max |U+U - I| entry.
  double unitarity_defect() const;
};

/// Interaction-picture coupling V~(t)_{jk} = V_{jk} exp(i 2 pi (E_j - E_k) t)
/// for a drift Hamiltonian given by its eigenbasis energies (GHz).
Eigen::MatrixXcd interaction_coupling(const Eigen::VectorXd& energies_ghz,
                                      const Eigen::MatrixXcd& v_eigenbasis,
                                      double t_ns);

/// Evolves i dU/dt = 2 pi f(t) V~(t) U in the eigenbasis of the drift
/// Hamiltonian with a midpoint piecewise-constant exponential, which is
/// unitary by construction. Each instance precomputes the eigendecomposition
/// of the coupling so a step costs two small matrix products.
class Propagator {
 public:
  /// From spectral data of the drift plus the system it came from (the
  /// coupling is -g muB times the tabulated transition elements).
  Propagator(const SpectralData& spectral, double g_factor);

  /// From a drift Hamiltonian and coupling in any common basis; both are
  /// rotated once into the drift eigenbasis.
  Propagator(const Eigen::MatrixXcd& h0_ghz, const Eigen::MatrixXcd& v_ghz_per_t);

  int dimension() const { return static_cast<int>(energies_.size()); }
  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::MatrixXcd& coupling_eigenbasis() const { return v_eig_; }
  /// Largest |E_j - E_k| of the drift spectrum (GHz).
  double spectral_width_ghz() const { return numax_spectrum_; }
  /// nu_max entering the step rule for a given pulse.
  double nu_max_ghz(const Pulse& pulse) const;

  EvolutionTrace propagate_unitary(const Pulse& pulse, const TimeGrid& grid,
                                   Frame frame = Frame::interaction,
                                   const PropagationOptions& opts = {}) const;

  /// One-column version; rejects unnormalized initial states.
  Eigen::VectorXcd propagate_state(const Pulse& pulse, const TimeGrid& grid,
                                   const Eigen::VectorXcd& psi0,
                                   Frame frame = Frame::interaction,
                                   const PropagationOptions& opts = {}) const;

  /// Backward evolution of the costate from its final condition
  /// B(t_f) = [(1/d) Tr(U_target+ U(t_f))] U_target under the same generator
  /// as the forward run (whose trace supplies U(t_f) and the grid).
  EvolutionTrace propagate_costate(const Pulse& pulse, const TimeGrid& grid,
                                   const Eigen::MatrixXcd& u_target,
                                   const EvolutionTrace& forward,
                                   const PropagationOptions& opts = {}) const;

  /// Backward evolution of an arbitrary boundary matrix from t_f to 0.
  Eigen::MatrixXcd evolve_backward(const Pulse& pulse, const TimeGrid& grid,
                                   const Eigen::MatrixXcd& boundary,
                                   const PropagationOptions& opts = {}) const;

  // Sampled-pulse core used by the optimizer: f_mid holds f((i+1/2)h).
  Eigen::MatrixXcd unitary_from_samples(const std::vector<double>& f_mid,
                                        const TimeGrid& grid,
                                        std::vector<Eigen::MatrixXcd>* nodes = nullptr) const;
  Eigen::VectorXcd state_from_samples(const std::vector<double>& f_mid,
                                      const TimeGrid& grid,
                                      const Eigen::VectorXcd& psi0) const;

  struct GateAdjoint {
    Eigen::MatrixXcd u_final;
    std::complex<double> overlap;   // (1/d) Tr(U(t_f)+ U_target)
    double fidelity = 0.0;          // |overlap|^2
    Eigen::VectorXd integrand;      // s_i = Im[(1/d) Tr(B+ V~ U)] per step
  };
  /// Forward + reverse sweep producing the exact discrete adjoint integrand
  /// of the gate functional; grad u_m = 2 (2 pi) h sum_i g_m(t_mid,i) s_i.
  GateAdjoint gate_adjoint(const std::vector<double>& f_mid, const TimeGrid& grid,
                           const Eigen::MatrixXcd& u_target) const;

  struct StateAdjoint {
    Eigen::VectorXcd psi_final;
    std::complex<double> overlap;   // <target|psi(t_f)>
    double fidelity = 0.0;          // |overlap|^2
    Eigen::VectorXd integrand;      // s_i = Im <chi| V~ |psi> per step
  };
  StateAdjoint state_adjoint(const std::vector<double>& f_mid, const TimeGrid& grid,
                             const Eigen::VectorXcd& psi0,
                             const Eigen::VectorXcd& target) const;

 private:
  void init_from_eigenbasis();
  void check_grid(const Pulse& pulse, const TimeGrid& grid,
                  const PropagationOptions& opts) const;

  Eigen::VectorXd energies_;   // GHz, ascending
  Eigen::MatrixXcd v_eig_;     // coupling in drift eigenbasis (GHz/T)
  Eigen::MatrixXcd v_q_;       // v_eig = Q diag(lam) Q+
  Eigen::VectorXd v_lam_;
  double numax_spectrum_ = 0.0;
};

// Free-function forms of the module operations (convenience for tests and
// one-shot callers).
EvolutionTrace propagate_unitary(const Eigen::MatrixXcd& h0, const Eigen::MatrixXcd& v,
                                 const Pulse& pulse, const TimeGrid& grid,
                                 Frame frame = Frame::interaction,
                                 const PropagationOptions& opts = {});
Eigen::VectorXcd propagate_state(const Eigen::MatrixXcd& h0, const Eigen::MatrixXcd& v,
                                 const Pulse& pulse, const TimeGrid& grid,
                                 const Eigen::VectorXcd& psi0,
                                 Frame frame = Frame::interaction,
                                 const PropagationOptions& opts = {});

}  // namespace spinoct
