#include "spinoct/propagation.hpp"

#include <cmath>
#include <stdexcept>

#include "fft_util.hpp"
#include "spinoct/constants.hpp"
#include "spinoct/errors.hpp"

namespace spinoct {

namespace {

Eigen::VectorXcd phases_at(const Eigen::VectorXd& energies_ghz, double t_ns) {
  Eigen::VectorXcd phi(energies_ghz.size());
  for (int j = 0; j < energies_ghz.size(); ++j)
    phi(j) = std::polar(1.0, kTwoPi * energies_ghz(j) * t_ns);
  return phi;
}

constexpr int kPhaseResyncStride = 8192;

}  // namespace

void TimeGrid::validate() const {
  if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
  if (!(t_f_ns > 0.0)) throw std::invalid_argument("TimeGrid: t_f must be > 0");
}

int required_steps(double t_f_ns, double nu_max_ghz, int samples_per_period) {
  const double n = std::ceil(t_f_ns * samples_per_period * nu_max_ghz);
  return std::max(1, static_cast<int>(n));
}

TimeGrid TimeGrid::with_step_rule(double t_f_ns, double nu_max_ghz,
                                  int samples_per_period) {
  const int n = std::max(16, required_steps(t_f_ns, nu_max_ghz, samples_per_period));
  TimeGrid grid{t_f_ns, detail::next_fast_size(n)};
  grid.validate();
  return grid;
}

double EvolutionTrace::unitarity_defect() const {
  const int d = static_cast<int>(final_unitary.rows());
  return (final_unitary.adjoint() * final_unitary - Eigen::MatrixXcd::Identity(d, d))
      .cwiseAbs()
      .maxCoeff();
}

Eigen::MatrixXcd interaction_coupling(const Eigen::VectorXd& energies_ghz,
                                      const Eigen::MatrixXcd& v_eigenbasis,
                                      double t_ns) {
  const Eigen::VectorXcd phi = phases_at(energies_ghz, t_ns);
  return phi.asDiagonal() * v_eigenbasis * phi.conjugate().asDiagonal();
}

Propagator::Propagator(const SpectralData& spectral, double g_factor)
    : energies_(spectral.energies),
      v_eig_(-g_factor * kBohrMagnetonGHzPerT * spectral.transition_elements) {
  init_from_eigenbasis();
}

Propagator::Propagator(const Eigen::MatrixXcd& h0_ghz,
                       const Eigen::MatrixXcd& v_ghz_per_t) {
  const double scale = std::max(1.0, v_ghz_per_t.cwiseAbs().maxCoeff());
  if ((v_ghz_per_t - v_ghz_per_t.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("Propagator: coupling operator is not Hermitian");
  const SpectralData sd = diagonalize(h0_ghz, v_ghz_per_t);
  energies_ = sd.energies;
  v_eig_ = sd.transition_elements;
  init_from_eigenbasis();
}

void Propagator::init_from_eigenbasis() {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(v_eig_);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("Propagator: coupling eigendecomposition failed");
  v_q_ = solver.eigenvectors();
  v_lam_ = solver.eigenvalues();
  numax_spectrum_ = energies_(energies_.size() - 1) - energies_(0);
}

double Propagator::nu_max_ghz(const Pulse& pulse) const {
  return std::max(pulse.max_frequency_ghz(), numax_spectrum_);
}

void Propagator::check_grid(const Pulse& pulse, const TimeGrid& grid,
                            const PropagationOptions& opts) const {
  grid.validate();
  if (!opts.enforce_step_rule) return;
  const int required =
      required_steps(grid.t_f_ns, nu_max_ghz(pulse), opts.samples_per_period);
  if (grid.n_steps < required)
    throw NumericalError(
        "time grid too coarse: N = " + std::to_string(grid.n_steps) +
        ", step rule requires N >= " + std::to_string(required) +
        " (nu_max = " + std::to_string(nu_max_ghz(pulse)) + " GHz over " +
        std::to_string(grid.t_f_ns) + " ns)");
}

Eigen::MatrixXcd Propagator::unitary_from_samples(const std::vector<double>& f_mid,
                                                  const TimeGrid& grid,
                                                  std::vector<Eigen::MatrixXcd>* nodes) const {
  const int d = dimension();
  const int n = grid.n_steps;
  const double h = grid.step_ns();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d, d);
  Eigen::MatrixXcd a(d, d), y(d, d);
  Eigen::VectorXcd phi = phases_at(energies_, 0.5 * h);
  const Eigen::VectorXcd step_factor = phases_at(energies_, h);
  if (nodes) {
    nodes->clear();
    nodes->reserve(n + 1);
    nodes->push_back(u);
  }
  for (int i = 0; i < n; ++i) {
    const double c = kTwoPi * h * f_mid[i];
    if (c != 0.0) {
      a.noalias() = phi.conjugate().asDiagonal() * u;
      y.noalias() = v_q_.adjoint() * a;
      for (int j = 0; j < d; ++j) y.row(j) *= std::polar(1.0, -c * v_lam_(j));
      a.noalias() = v_q_ * y;
      u.noalias() = phi.asDiagonal() * a;
    }
    if (nodes) nodes->push_back(u);
    if ((i + 1) % kPhaseResyncStride == 0)
      phi = phases_at(energies_, (i + 1.5) * h);
    else
      phi.array() *= step_factor.array();
  }
  return u;
}

Eigen::VectorXcd Propagator::state_from_samples(const std::vector<double>& f_mid,
                                                const TimeGrid& grid,
                                                const Eigen::VectorXcd& psi0) const {
  const int d = dimension();
  const int n = grid.n_steps;
  const double h = grid.step_ns();
  Eigen::VectorXcd psi = psi0;
  Eigen::VectorXcd av(d), yv(d);
  Eigen::VectorXcd phi = phases_at(energies_, 0.5 * h);
  const Eigen::VectorXcd step_factor = phases_at(energies_, h);
  for (int i = 0; i < n; ++i) {
    const double c = kTwoPi * h * f_mid[i];
    if (c != 0.0) {
      av.array() = phi.conjugate().array() * psi.array();
      yv.noalias() = v_q_.adjoint() * av;
      for (int j = 0; j < d; ++j) yv(j) *= std::polar(1.0, -c * v_lam_(j));
      av.noalias() = v_q_ * yv;
      psi.array() = phi.array() * av.array();
    }
    if ((i + 1) % kPhaseResyncStride == 0)
      phi = phases_at(energies_, (i + 1.5) * h);
    else
      phi.array() *= step_factor.array();
  }
  return psi;
}

EvolutionTrace Propagator::propagate_unitary(const Pulse& pulse, const TimeGrid& grid,
                                             Frame frame,
                                             const PropagationOptions& opts) const {
  check_grid(pulse, grid, opts);
  const std::vector<double> f_mid = pulse.sample_midpoints(grid.t_f_ns, grid.n_steps);
  EvolutionTrace trace;
  trace.grid = grid;
  trace.final_unitary =
      unitary_from_samples(f_mid, grid, opts.store_nodes ? &trace.node_unitaries : nullptr);
  if (frame == Frame::lab) {
    const double h = grid.step_ns();
    trace.final_unitary =
        phases_at(energies_, -grid.t_f_ns).asDiagonal() * trace.final_unitary;
    for (std::size_t i = 0; i < trace.node_unitaries.size(); ++i)
      trace.node_unitaries[i] = phases_at(energies_, -(static_cast<double>(i) * h))
                                    .asDiagonal() * trace.node_unitaries[i];
  }
  return trace;
}

Eigen::VectorXcd Propagator::propagate_state(const Pulse& pulse, const TimeGrid& grid,
                                             const Eigen::VectorXcd& psi0, Frame frame,
                                             const PropagationOptions& opts) const {
  check_grid(pulse, grid, opts);
  if (psi0.size() != dimension())
    throw std::invalid_argument("propagate_state: state dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("propagate_state: initial state must be normalized");
  const std::vector<double> f_mid = pulse.sample_midpoints(grid.t_f_ns, grid.n_steps);
  Eigen::VectorXcd psi = state_from_samples(f_mid, grid, psi0);
  if (frame == Frame::lab)
    psi.array() *= phases_at(energies_, -grid.t_f_ns).array();
  return psi;
}

Eigen::MatrixXcd Propagator::evolve_backward(const Pulse& pulse, const TimeGrid& grid,
                                             const Eigen::MatrixXcd& boundary,
                                             const PropagationOptions& opts) const {
  check_grid(pulse, grid, opts);
  const std::vector<double> f_mid = pulse.sample_midpoints(grid.t_f_ns, grid.n_steps);
  const int d = dimension();
  const int n = grid.n_steps;
  const double h = grid.step_ns();
  Eigen::MatrixXcd b = boundary;
  Eigen::MatrixXcd a(d, d), y(d, d);
  Eigen::VectorXcd phi = phases_at(energies_, (n - 0.5) * h);
  const Eigen::VectorXcd step_back = phases_at(energies_, -h);
  for (int i = n - 1; i >= 0; --i) {
    const double c = kTwoPi * h * f_mid[i];
    if (c != 0.0) {
      a.noalias() = phi.conjugate().asDiagonal() * b;
      y.noalias() = v_q_.adjoint() * a;
      for (int j = 0; j < d; ++j) y.row(j) *= std::polar(1.0, c * v_lam_(j));
      a.noalias() = v_q_ * y;
      b.noalias() = phi.asDiagonal() * a;
    }
    if ((n - i) % kPhaseResyncStride == 0)
      phi = phases_at(energies_, (i - 0.5) * h);
    else
      phi.array() *= step_back.array();
  }
  return b;
}

EvolutionTrace Propagator::propagate_costate(const Pulse& pulse, const TimeGrid& grid,
                                             const Eigen::MatrixXcd& u_target,
                                             const EvolutionTrace& forward,
                                             const PropagationOptions& opts) const {
  if (!(forward.grid == grid))
    throw std::invalid_argument(
        "propagate_costate: forward and backward grids do not match");
  check_grid(pulse, grid, opts);
  const int d = dimension();
  const std::complex<double> overlap =
      (u_target.adjoint() * forward.final_unitary).trace() / static_cast<double>(d);
  const Eigen::MatrixXcd b_final = overlap * u_target;

  EvolutionTrace trace;
  trace.grid = grid;
  if (!opts.store_nodes) {
    trace.final_unitary = evolve_backward(pulse, grid, b_final, opts);
    return trace;
  }

  const std::vector<double> f_mid = pulse.sample_midpoints(grid.t_f_ns, grid.n_steps);
  const int n = grid.n_steps;
  const double h = grid.step_ns();
  Eigen::MatrixXcd b = b_final;
  Eigen::MatrixXcd a(d, d), y(d, d);
  Eigen::VectorXcd phi = phases_at(energies_, (n - 0.5) * h);
  const Eigen::VectorXcd step_back = phases_at(energies_, -h);
  std::vector<Eigen::MatrixXcd> reversed;
  reversed.reserve(n + 1);
  reversed.push_back(b);
  for (int i = n - 1; i >= 0; --i) {
    const double c = kTwoPi * h * f_mid[i];
    if (c != 0.0) {
      a.noalias() = phi.conjugate().asDiagonal() * b;
      y.noalias() = v_q_.adjoint() * a;
      for (int j = 0; j < d; ++j) y.row(j) *= std::polar(1.0, c * v_lam_(j));
      a.noalias() = v_q_ * y;
      b.noalias() = phi.asDiagonal() * a;
    }
    reversed.push_back(b);
    if ((n - i) % kPhaseResyncStride == 0)
      phi = phases_at(energies_, (i - 0.5) * h);
    else
      phi.array() *= step_back.array();
  }
  trace.node_unitaries.assign(reversed.rbegin(), reversed.rend());
  trace.final_unitary = b_final;
  return trace;
}

Propagator::GateAdjoint Propagator::gate_adjoint(const std::vector<double>& f_mid,
                                                 const TimeGrid& grid,
                                                 const Eigen::MatrixXcd& u_target) const {
  const int d = dimension();
  const int n = grid.n_steps;
  const double h = grid.step_ns();

  GateAdjoint result;
  result.u_final = unitary_from_samples(f_mid, grid);
  result.overlap = (result.u_final.adjoint() * u_target).trace() / static_cast<double>(d);
  result.fidelity = std::norm(result.overlap);
  result.integrand.resize(n);

  Eigen::MatrixXcd u = result.u_final;
  Eigen::MatrixXcd b = std::conj(result.overlap) * u_target;
  Eigen::MatrixXcd a(d, d), cm(d, d), y(d, d), t1(d, d);
  Eigen::VectorXcd phi = phases_at(energies_, (n - 0.5) * h);
  const Eigen::VectorXcd step_back = phases_at(energies_, -h);

  for (int i = n - 1; i >= 0; --i) {
    a.noalias() = phi.conjugate().asDiagonal() * u;
    cm.noalias() = phi.conjugate().asDiagonal() * b;
    t1.noalias() = v_eig_ * a;
    result.integrand(i) =
        (cm.conjugate().cwiseProduct(t1)).sum().imag() / static_cast<double>(d);
    const double c = kTwoPi * h * f_mid[i];
    if (c != 0.0) {
      y.noalias() = v_q_.adjoint() * a;
      for (int j = 0; j < d; ++j) y.row(j) *= std::polar(1.0, c * v_lam_(j));
      a.noalias() = v_q_ * y;
      u.noalias() = phi.asDiagonal() * a;
      y.noalias() = v_q_.adjoint() * cm;
      for (int j = 0; j < d; ++j) y.row(j) *= std::polar(1.0, c * v_lam_(j));
      cm.noalias() = v_q_ * y;
      b.noalias() = phi.asDiagonal() * cm;
    }
    if ((n - i) % kPhaseResyncStride == 0)
      phi = phases_at(energies_, (i - 0.5) * h);
    else
      phi.array() *= step_back.array();
  }
  return result;
}

Propagator::StateAdjoint Propagator::state_adjoint(const std::vector<double>& f_mid,
                                                   const TimeGrid& grid,
                                                   const Eigen::VectorXcd& psi0,
                                                   const Eigen::VectorXcd& target) const {
  const int d = dimension();
  const int n = grid.n_steps;
  const double h = grid.step_ns();

  StateAdjoint result;
  result.psi_final = state_from_samples(f_mid, grid, psi0);
  result.overlap = target.dot(result.psi_final);
  result.fidelity = std::norm(result.overlap);
  result.integrand.resize(n);

  Eigen::VectorXcd psi = result.psi_final;
  Eigen::VectorXcd chi = result.overlap * target;
  Eigen::VectorXcd av(d), cv(d), yv(d), t1v(d);
  Eigen::VectorXcd phi = phases_at(energies_, (n - 0.5) * h);
  const Eigen::VectorXcd step_back = phases_at(energies_, -h);

  for (int i = n - 1; i >= 0; --i) {
    av.array() = phi.conjugate().array() * psi.array();
    cv.array() = phi.conjugate().array() * chi.array();
    t1v.noalias() = v_eig_ * av;
    result.integrand(i) = cv.dot(t1v).imag();
    const double c = kTwoPi * h * f_mid[i];
    if (c != 0.0) {
      yv.noalias() = v_q_.adjoint() * av;
      for (int j = 0; j < d; ++j) yv(j) *= std::polar(1.0, c * v_lam_(j));
      av.noalias() = v_q_ * yv;
      psi.array() = phi.array() * av.array();
      yv.noalias() = v_q_.adjoint() * cv;
      for (int j = 0; j < d; ++j) yv(j) *= std::polar(1.0, c * v_lam_(j));
      cv.noalias() = v_q_ * yv;
      chi.array() = phi.array() * cv.array();
    }
    if ((n - i) % kPhaseResyncStride == 0)
      phi = phases_at(energies_, (i - 0.5) * h);
    else
      phi.array() *= step_back.array();
  }
  return result;
}

EvolutionTrace propagate_unitary(const Eigen::MatrixXcd& h0, const Eigen::MatrixXcd& v,
                                 const Pulse& pulse, const TimeGrid& grid, Frame frame,
                                 const PropagationOptions& opts) {
  return Propagator(h0, v).propagate_unitary(pulse, grid, frame, opts);
}

Eigen::VectorXcd propagate_state(const Eigen::MatrixXcd& h0, const Eigen::MatrixXcd& v,
                                 const Pulse& pulse, const TimeGrid& grid,
                                 const Eigen::VectorXcd& psi0, Frame frame,
                                 const PropagationOptions& opts) {
  return Propagator(h0, v).propagate_state(pulse, grid, psi0, frame, opts);
}

}  // namespace spinoct
