#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spinoct/pulse.hpp"
#include "spinoct/spin_model.hpp"

namespace spinoct {

enum class RotationAxis { x, y };

/// A rotating-frame rotation by `angle` about the in-plane axis
/// n = (cos(arg mu + phi), -sin(arg mu + phi), 0) in the (lower, upper)
/// two-level subspace, realized by a resonant drive with phase `drive_phase`.
struct RotationSpec {
  int lower = 0;
  int upper = 1;
  double angle_rad = 0.0;       // >= 0 after normalization
  double drive_phase_rad = 0.0; // phi in f(t) = lambda cos(w t + phi)
  Eigen::Vector3d axis = Eigen::Vector3d(1, 0, 0);

  void validate(int dim) const;
};

/// Drive phase selecting the rotation axis: phi = -arg(mu_jk) for X,
/// phi = -arg(mu_jk) - pi/2 for Y. Rejects mu_jk = 0.
double axis_phase(std::complex<double> mu_jk, RotationAxis axis);

/// Rotation about `axis` by `angle` on levels (j, k) of a d-level system,
/// given the coupling element that fixes the drive phase. Negative angles
/// are folded into a pi-shifted axis so the stored spec has angle >= 0.
RotationSpec make_rotation(int lower, int upper, double angle_rad, RotationAxis axis,
                           std::complex<double> mu_jk);

/// exp(-i theta/2 n.sigma) on the (lower, upper) block, identity elsewhere.
Eigen::MatrixXcd rwa_rotation(const RotationSpec& spec, int dim);

/// Resonant monochromatic pulse realizing the rotation at amplitude lambda:
/// carrier at the transition frequency, duration (theta/pi) * t_pi(lambda).
MonochromaticPulse monochromatic_for(const RotationSpec& spec, double lambda_t,
                                     const SpectralData& spectral, double g_factor,
                                     double start_ns = 0.0);

/// Analytic product of the block rotations, applied in list order.
Eigen::MatrixXcd sequence_unitary(std::span<const RotationSpec> specs, int dim);

/// Back-to-back monochromatic segments realizing the sequence; total time is
/// the sum of the individual rotation durations (no inter-pulse gaps).
PulseSchedule sequence_pulse_schedule(std::span<const RotationSpec> specs,
                                      double lambda_t, const SpectralData& spectral,
                                      double g_factor);

/// X-axis pi rotations stepping |from> to |to> through adjacent levels.
std::vector<RotationSpec> ladder_pi_sequence(int from, int to,
                                             const SpectralData& spectral);

/// R_X(-pi/2) on (0,1) followed by pi rotations up the ladder; reaches
/// (|0> - i |d-1>)/sqrt(2) exactly.
std::vector<RotationSpec> superposition_sequence(const SpectralData& spectral);

}  // namespace spinoct
