#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace spinoct {

/// Time-domain control field f(t) in tesla, t in ns.
class Pulse {
 public:
  virtual ~Pulse() = default;
  virtual double value(double t_ns) const = 0;
  /// Highest frequency content relevant for step-size selection (GHz).
  virtual double max_frequency_ghz() const = 0;
  /// Samples f at the n midpoints (i + 1/2) * t_f / n. The base
  /// implementation loops over value(); subclasses may override with a
  /// faster equivalent path.
  virtual std::vector<double> sample_midpoints(double t_f_ns, int n) const;
};

/// f(t) = amplitude * cos(2 pi freq t + phase) inside [window_start, window_end],
/// zero outside. The phase references absolute time, so windows of the same
/// carrier concatenate with a continuous rotating-frame axis.
class MonochromaticPulse : public Pulse {
 public:
  MonochromaticPulse(double amplitude_t, double frequency_ghz, double phase_rad,
                     double window_start_ns, double window_end_ns);

  double value(double t_ns) const override;
  double max_frequency_ghz() const override { return frequency_ghz_; }

  double amplitude_t() const { return amplitude_t_; }
  double frequency_ghz() const { return frequency_ghz_; }
  double phase_rad() const { return phase_rad_; }
  double window_start_ns() const { return window_start_ns_; }
  double window_end_ns() const { return window_end_ns_; }
  double duration_ns() const { return window_end_ns_ - window_start_ns_; }

 private:
  double amplitude_t_;
  double frequency_ghz_;
  double phase_rad_;
  double window_start_ns_;
  double window_end_ns_;
};

/// Back-to-back monochromatic segments (e.g. a pi-pulse ladder).
class PulseSchedule : public Pulse {
 public:
  PulseSchedule() = default;
  explicit PulseSchedule(std::vector<MonochromaticPulse> segments);

  double value(double t_ns) const override;
  double max_frequency_ghz() const override;

  const std::vector<MonochromaticPulse>& segments() const { return segments_; }
  double duration_ns() const;

 private:
  std::vector<MonochromaticPulse> segments_;
};

/// Fourier-parameterized pulse on [0, t_f]:
///   f(t) = u_0/sqrt(t_f) + sum_k (2/sqrt(t_f)) [u_{2k} cos(w_k t) + u_{2k-1} sin(w_k t)]
/// with w_k = 2 pi k / t_f, k = 1..K. Coefficients are in tesla*sqrt(ns) so
/// 2 u_k / sqrt(t_f) is the per-term peak amplitude in tesla.
///
/// When flagged constrained, u_0 = 0 and sum_k u_{2k} = 0 hold by
/// construction, which pins f(0) = f(t_f) = 0 and zero average.
class FourierPulse : public Pulse {
 public:
  FourierPulse(double t_f_ns, int cutoff_index,
               Eigen::VectorXd coefficients, bool constrained);

  static FourierPulse zero(double t_f_ns, int cutoff_index, bool constrained = true);

  /// Builds a constrained pulse from the 2K-1 free coefficients
  /// (u_1 .. u_{2K-1}); u_0 and u_{2K} are filled in from the constraints.
  static FourierPulse from_free_coefficients(double t_f_ns, int cutoff_index,
                                             const Eigen::VectorXd& free_coeffs);

  /// Extracts the free coefficients of a constrained pulse.
  Eigen::VectorXd free_coefficients() const;

  double value(double t_ns) const override;
  double max_frequency_ghz() const override;
  std::vector<double> sample_midpoints(double t_f_ns, int n) const override;

  double t_f_ns() const { return t_f_ns_; }
  int cutoff_index() const { return cutoff_index_; }
  bool constrained() const { return constrained_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

  /// Number of free parameters: 2K-1 when constrained, 2K+1 otherwise.
  int n_free() const { return constrained_ ? 2 * cutoff_index_ - 1 : 2 * cutoff_index_ + 1; }

 private:
  double t_f_ns_;
  int cutoff_index_;
  Eigen::VectorXd coefficients_;  // (u_0, u_1, ..., u_{2K})
  bool constrained_;
};

/// Duration of a resonant pi pulse of amplitude lambda on a transition with
/// coupling element mu_jk: t_pi = pi / (2 pi lambda g muB |mu_jk|), in ns.
double pi_pulse_duration(double lambda_t, std::complex<double> mu_jk, double g_factor);

/// Per-coefficient peak-amplitude residuals |2 u_k / sqrt(t_f)| - b_max;
/// all <= 0 means the pulse is feasible under the bound.
Eigen::VectorXd peak_amplitude_bound_residuals(const FourierPulse& pulse, double b_max_t);

/// (frequency GHz, power) per mode; weights chosen so the total equals
/// the integral of f^2 over [0, t_f].
std::vector<std::pair<double, double>> power_spectrum(const FourierPulse& pulse);

/// Pulse export: a coefficient (or segment) block plus a sampled
/// (t_ns, f_tesla) table. Fourier and schedule pulses round-trip.
void write_pulse_file(const std::filesystem::path& path, const FourierPulse& pulse,
                      int n_samples = 1000);
void write_pulse_file(const std::filesystem::path& path, const PulseSchedule& schedule,
                      int n_samples = 1000);

using ImportedPulse = std::variant<FourierPulse, PulseSchedule>;
ImportedPulse read_pulse_file(const std::filesystem::path& path);

}  // namespace spinoct
