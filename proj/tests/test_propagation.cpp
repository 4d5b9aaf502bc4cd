#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spinoct/analytic_rwa.hpp"
#include "spinoct/constants.hpp"
#include "spinoct/errors.hpp"
#include "spinoct/propagation.hpp"
#include "spinoct/qoct.hpp"
#include "spinoct/spin_model.hpp"
#include "spinoct/targets.hpp"

using namespace spinoct;
using std::complex;

namespace {

SpinSystem half_spin_system(double b_z = 0.05) {
  SpinSystem sys;
  sys.spin = 0.5;
  sys.g_factor = 2.0;
  sys.static_field_t = Eigen::Vector3d(0, 0, b_z);
  sys.drive_direction = Eigen::Vector3d(0, 1, 0);
  return sys;
}

FourierPulse test_fourier_pulse(double t_f, int k, unsigned seed, double scale) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::VectorXd free(2 * k - 1);
  for (int i = 0; i < free.size(); ++i) free(i) = dist(rng);
  return FourierPulse::from_free_coefficients(t_f, k, free);
}

}  // namespace

TEST_CASE("interaction coupling: t = 0, diagonal invariance, norm") {
  const SpectralData sd = system_spectrum(SpinSystem::gdw30());
  const Eigen::MatrixXcd v = -2.0 * kBohrMagnetonGHzPerT * sd.transition_elements;

  CHECK((interaction_coupling(sd.energies, v, 0.0) - v).cwiseAbs().maxCoeff() < 1e-14);

  const Eigen::MatrixXcd diag_v =
      Eigen::VectorXcd::LinSpaced(8, 1.0, 8.0).asDiagonal().toDenseMatrix();
  CHECK((interaction_coupling(sd.energies, diag_v, 2.37) - diag_v).cwiseAbs().maxCoeff() <
        1e-13);

  for (double t : {0.3, 1.9, 7.7}) {
    const Eigen::MatrixXcd vt = interaction_coupling(sd.energies, v, t);
    CHECK(vt.norm() == doctest::Approx(v.norm()).epsilon(1e-13));
    CHECK((vt - vt.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("propagate_unitary: zero pulse is exact identity in interaction frame") {
  const SpinSystem sys = SpinSystem::gdw30();
  const Propagator prop(system_spectrum(sys), sys.g_factor);
  const FourierPulse zero = FourierPulse::zero(5.0, 4);
  const TimeGrid grid = TimeGrid::with_step_rule(5.0, prop.nu_max_ghz(zero));
  const EvolutionTrace trace = prop.propagate_unitary(zero, grid);
  CHECK((trace.final_unitary - Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("propagate_unitary: unitarity at every stored node") {
  const SpinSystem sys = SpinSystem::gdw30();
  const SpectralData sd = system_spectrum(sys);
  const Propagator prop(sd, sys.g_factor);
  const FourierPulse pulse = test_fourier_pulse(4.0, 16, 5, 2e-4);
  const TimeGrid grid = TimeGrid::with_step_rule(4.0, prop.nu_max_ghz(pulse));
  PropagationOptions opts;
  opts.store_nodes = true;
  const EvolutionTrace trace = prop.propagate_unitary(pulse, grid, Frame::interaction, opts);
  CHECK(trace.unitarity_defect() < 1e-12);
  for (std::size_t i = 0; i < trace.node_unitaries.size(); i += 500) {
    const auto& u = trace.node_unitaries[i];
    CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() <
          1e-8);
  }
}

TEST_CASE("propagate_unitary: halving the step changes the result below 1e-9") {
  const SpinSystem sys = SpinSystem::gdw30();
  const Propagator prop(system_spectrum(sys), sys.g_factor);
  const FourierPulse pulse = test_fourier_pulse(6.0, 24, 9, 2e-4);
  const TimeGrid grid = TimeGrid::with_step_rule(6.0, prop.nu_max_ghz(pulse), 160);
  const TimeGrid fine{6.0, 2 * grid.n_steps};
  PropagationOptions opts;
  opts.enforce_step_rule = false;
  const Eigen::MatrixXcd u1 = prop.propagate_unitary(pulse, grid, Frame::interaction, opts)
                                  .final_unitary;
  const Eigen::MatrixXcd u2 = prop.propagate_unitary(pulse, fine, Frame::interaction, opts)
                                  .final_unitary;
  CHECK((u1 - u2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("propagate_unitary: step rule violation names the required N") {
  const SpinSystem sys = SpinSystem::gdw30();
  const Propagator prop(system_spectrum(sys), sys.g_factor);
  const FourierPulse pulse = test_fourier_pulse(5.0, 8, 3, 1e-4);
  const TimeGrid coarse{5.0, 100};
  try {
    prop.propagate_unitary(pulse, coarse);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    const int required = required_steps(5.0, prop.nu_max_ghz(pulse));
    CHECK(what.find(std::to_string(required)) != std::string::npos);
  }
}

TEST_CASE("frame consistency: interaction result rotated vs independent lab integrator") {
  // Small system so the independent integrator converges to 1e-8 quickly.
  const SpinSystem sys = half_spin_system(0.05);
  const SpectralData sd = system_spectrum(sys);
  const Propagator prop(sd, sys.g_factor);
  const Eigen::MatrixXcd h0 = build_drift_hamiltonian(sys);
  const Eigen::MatrixXcd v = coupling_operator(sys);

  const double t_f = 4.0;
  const double lambda = 2e-3;
  const double nu = sd.transition_frequencies(0, 1);
  const MonochromaticPulse pulse(lambda, nu, 0.4, 0.0, t_f);

  const TimeGrid grid = TimeGrid::with_step_rule(t_f, prop.nu_max_ghz(pulse), 64);
  const EvolutionTrace lab = prop.propagate_unitary(pulse, grid, Frame::lab);

  // The oracle works in the eigenbasis of H0 so both sides share a basis.
  const Eigen::MatrixXcd h0_eig = sd.energies.asDiagonal();
  const Eigen::MatrixXcd v_eig =
      -sys.g_factor * kBohrMagnetonGHzPerT * sd.transition_elements;
  const Eigen::MatrixXcd u_oracle = oracles::lab_frame_unitary(
      h0_eig, v_eig, [&](double t) { return pulse.value(t); }, t_f, 1 << 19);

  CHECK((lab.final_unitary - u_oracle).cwiseAbs().maxCoeff() < 1e-8);

  // And the lab frame output is exactly the rotated interaction result.
  const EvolutionTrace inter = prop.propagate_unitary(pulse, grid);
  Eigen::VectorXcd phases(2);
  for (int j = 0; j < 2; ++j)
    phases(j) = std::polar(1.0, -kTwoPi * sd.energies(j) * t_f);
  CHECK((phases.asDiagonal() * inter.final_unitary - lab.final_unitary)
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  (void)h0;
  (void)v;
}

TEST_CASE("time reversal: backward propagation of U(t_f) returns identity") {
  const SpinSystem sys = SpinSystem::gdw30();
  const Propagator prop(system_spectrum(sys), sys.g_factor);
  const FourierPulse pulse = test_fourier_pulse(3.0, 12, 21, 3e-4);
  const TimeGrid grid = TimeGrid::with_step_rule(3.0, prop.nu_max_ghz(pulse));
  const EvolutionTrace fwd = prop.propagate_unitary(pulse, grid);
  const Eigen::MatrixXcd back = prop.evolve_backward(pulse, grid, fwd.final_unitary);
  CHECK((back - Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("propagate_state: column consistency, norm, rejection") {
  const SpinSystem sys = SpinSystem::gdw30();
  const Propagator prop(system_spectrum(sys), sys.g_factor);
  const FourierPulse pulse = test_fourier_pulse(2.5, 10, 13, 3e-4);
  const TimeGrid grid = TimeGrid::with_step_rule(2.5, prop.nu_max_ghz(pulse));

  const EvolutionTrace trace = prop.propagate_unitary(pulse, grid);
  for (int j : {0, 3, 7}) {
    const Eigen::VectorXcd psi =
        prop.propagate_state(pulse, grid, basis_state(j, 8).state);
    CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
    CHECK((psi - trace.final_unitary.col(j)).cwiseAbs().maxCoeff() < 1e-10);
  }

  Eigen::VectorXcd bad = Eigen::VectorXcd::Zero(8);
  bad(0) = 1.1;
  CHECK_THROWS_AS(prop.propagate_state(pulse, grid, bad), std::invalid_argument);

  // zero pulse keeps |j> exactly in the interaction picture
  const FourierPulse zero = FourierPulse::zero(2.5, 10);
  const Eigen::VectorXcd kept = prop.propagate_state(zero, grid, basis_state(2, 8).state);
  CHECK((kept - basis_state(2, 8).state).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("propagate_state: GdW30 0->1 pi pulse at small amplitude is accurate") {
  const SpinSystem sys = SpinSystem::gdw30();
  const SpectralData sd = system_spectrum(sys);
  const Propagator prop(sd, sys.g_factor);
  const double lambda = 5e-5;  // weak drive, long pulse
  const auto spec =
      make_rotation(0, 1, kPi, RotationAxis::x, sd.transition_elements(0, 1));
  const MonochromaticPulse pulse = monochromatic_for(spec, lambda, sd, sys.g_factor);
  const TimeGrid grid =
      TimeGrid::with_step_rule(pulse.duration_ns(), prop.nu_max_ghz(pulse));
  const Eigen::VectorXcd psi = prop.propagate_state(pulse, grid, basis_state(0, 8).state);
  CHECK(state_fidelity(psi, basis_state(1, 8).state) > 0.999);
}

TEST_CASE("propagate_costate: boundary handling and conserved pairing") {
  const SpinSystem sys = SpinSystem::gdw30();
  const SpectralData sd = system_spectrum(sys);
  const Propagator prop(sd, sys.g_factor);
  const double t_f = 2.0;
  const FourierPulse pulse = test_fourier_pulse(t_f, 8, 31, 4e-4);
  const TimeGrid grid = TimeGrid::with_step_rule(t_f, prop.nu_max_ghz(pulse));
  const Eigen::MatrixXcd u_target = toffoli_gate().unitary;

  PropagationOptions opts;
  opts.store_nodes = true;
  const EvolutionTrace fwd = prop.propagate_unitary(pulse, grid, Frame::interaction, opts);
  const EvolutionTrace costate = prop.propagate_costate(pulse, grid, u_target, fwd, opts);

  // final condition B(t_f) = [(1/d) Tr(U_G+ U(t_f))] U_G
  const complex<double> overlap =
      (u_target.adjoint() * fwd.final_unitary).trace() / 8.0;
  CHECK((costate.node_unitaries.back() - overlap * u_target).cwiseAbs().maxCoeff() <
        1e-12);

  // Frobenius pairing B(t).U(t) is conserved along the trajectory pair.
  REQUIRE(costate.node_unitaries.size() == fwd.node_unitaries.size());
  const auto pairing = [&](std::size_t i) {
    return (costate.node_unitaries[i].adjoint() * fwd.node_unitaries[i]).trace() / 8.0;
  };
  const complex<double> ref = pairing(fwd.node_unitaries.size() - 1);
  for (std::size_t i = 0; i < fwd.node_unitaries.size(); i += 400)
    CHECK(std::abs(pairing(i) - ref) < 1e-9);

  // zero pulse: costate stays at its final condition
  const FourierPulse zero = FourierPulse::zero(t_f, 8);
  const EvolutionTrace fwd0 = prop.propagate_unitary(zero, grid, Frame::interaction, opts);
  const EvolutionTrace cost0 = prop.propagate_costate(zero, grid, u_target, fwd0, opts);
  CHECK((cost0.node_unitaries.front() - cost0.node_unitaries.back()).cwiseAbs().maxCoeff() ==
        0.0);

  // grid mismatch rejected
  const TimeGrid other{t_f, grid.n_steps + 16};
  CHECK_THROWS_AS(prop.propagate_costate(pulse, other, u_target, fwd), std::invalid_argument);
}

TEST_CASE("free-function propagate wrappers accept lab-basis operators") {
  const SpinSystem sys = half_spin_system(0.08);
  const Eigen::MatrixXcd h0 = build_drift_hamiltonian(sys);
  const Eigen::MatrixXcd v = coupling_operator(sys);
  const FourierPulse pulse = test_fourier_pulse(3.0, 4, 17, 5e-4);
  const Propagator prop(h0, v);
  const TimeGrid grid = TimeGrid::with_step_rule(3.0, prop.nu_max_ghz(pulse));
  const EvolutionTrace a = propagate_unitary(h0, v, pulse, grid);
  const EvolutionTrace b = prop.propagate_unitary(pulse, grid);
  CHECK((a.final_unitary - b.final_unitary).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.unitarity_defect() < 1e-12);
}
