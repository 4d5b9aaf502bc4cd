#include "spinoct/analytic_rwa.hpp"

#include <cmath>
#include <stdexcept>

#include "spinoct/constants.hpp"

namespace spinoct {

void RotationSpec::validate(int dim) const {
  if (lower < 0 || upper >= dim || lower >= upper)
    throw std::invalid_argument("RotationSpec: need 0 <= lower < upper < d");
  if (std::abs(axis.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("RotationSpec: axis must be a unit vector");
}

double axis_phase(std::complex<double> mu_jk, RotationAxis axis) {
  if (std::abs(mu_jk) < 1e-14)
    throw std::invalid_argument("axis_phase: transition not driven (mu_jk = 0)");
  const double base = -std::arg(mu_jk);
  return axis == RotationAxis::x ? base : base - kPi / 2.0;
}

RotationSpec make_rotation(int lower, int upper, double angle_rad, RotationAxis axis,
                           std::complex<double> mu_jk) {
  double phi = axis_phase(mu_jk, axis);
  if (angle_rad < 0.0) {
    angle_rad = -angle_rad;
    phi += kPi;
  }
  RotationSpec spec;
  spec.lower = lower;
  spec.upper = upper;
  spec.angle_rad = angle_rad;
  spec.drive_phase_rad = phi;
  const double arg = std::arg(mu_jk) + phi;
  spec.axis = Eigen::Vector3d(std::cos(arg), -std::sin(arg), 0.0);
  return spec;
}

Eigen::MatrixXcd rwa_rotation(const RotationSpec& spec, int dim) {
  spec.validate(dim);
  const double half = 0.5 * spec.angle_rad;
  const std::complex<double> mi(0.0, -1.0);
  const double nx = spec.axis.x();
  const double ny = spec.axis.y();
  const double nz = spec.axis.z();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  u(spec.lower, spec.lower) = std::cos(half) + mi * std::sin(half) * nz;
  u(spec.upper, spec.upper) = std::cos(half) - mi * std::sin(half) * nz;
  u(spec.lower, spec.upper) = mi * std::sin(half) * std::complex<double>(nx, -ny);
  u(spec.upper, spec.lower) = mi * std::sin(half) * std::complex<double>(nx, ny);
  return u;
}

MonochromaticPulse monochromatic_for(const RotationSpec& spec, double lambda_t,
                                     const SpectralData& spectral, double g_factor,
                                     double start_ns) {
  spec.validate(spectral.dimension());
  if (!(spec.angle_rad > 0.0))
    throw std::invalid_argument("monochromatic_for: rotation angle must be > 0");
  const std::complex<double> mu = spectral.transition_elements(spec.lower, spec.upper);
  const double t_pi = pi_pulse_duration(lambda_t, mu, g_factor);
  const double duration = spec.angle_rad / kPi * t_pi;
  const double nu = spectral.transition_frequencies(spec.lower, spec.upper);
  return MonochromaticPulse(lambda_t, nu, spec.drive_phase_rad, start_ns,
                            start_ns + duration);
}

Eigen::MatrixXcd sequence_unitary(std::span<const RotationSpec> specs, int dim) {
  if (specs.empty())
    throw std::invalid_argument("sequence_unitary: empty rotation list");
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& spec : specs) u = rwa_rotation(spec, dim) * u;
  return u;
}

PulseSchedule sequence_pulse_schedule(std::span<const RotationSpec> specs,
                                      double lambda_t, const SpectralData& spectral,
                                      double g_factor) {
  if (specs.empty())
    throw std::invalid_argument("sequence_pulse_schedule: empty rotation list");
  std::vector<MonochromaticPulse> segments;
  segments.reserve(specs.size());
  double t = 0.0;
  for (const auto& spec : specs) {
    MonochromaticPulse seg = monochromatic_for(spec, lambda_t, spectral, g_factor, t);
    t = seg.window_end_ns();
    segments.push_back(std::move(seg));
  }
  return PulseSchedule(std::move(segments));
}

std::vector<RotationSpec> ladder_pi_sequence(int from, int to,
                                             const SpectralData& spectral) {
  if (from == to)
    throw std::invalid_argument("ladder_pi_sequence: from and to coincide");
  std::vector<RotationSpec> specs;
  const int step = from < to ? 1 : -1;
  for (int j = from; j != to; j += step) {
    const int lo = std::min(j, j + step);
    const int hi = std::max(j, j + step);
    specs.push_back(make_rotation(lo, hi, kPi, RotationAxis::x,
                                  spectral.transition_elements(lo, hi)));
  }
  return specs;
}

std::vector<RotationSpec> superposition_sequence(const SpectralData& spectral) {
  const int d = spectral.dimension();
  std::vector<RotationSpec> specs;
  specs.push_back(make_rotation(0, 1, -kPi / 2.0, RotationAxis::x,
                                spectral.transition_elements(0, 1)));
  for (int j = 1; j + 1 < d; ++j)
    specs.push_back(make_rotation(j, j + 1, kPi, RotationAxis::x,
                                  spectral.transition_elements(j, j + 1)));
  return specs;
}

}  // namespace spinoct
