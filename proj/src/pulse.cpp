#include "spinoct/pulse.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fft_util.hpp"
#include "spinoct/constants.hpp"
#include "spinoct/errors.hpp"

namespace spinoct {

std::vector<double> Pulse::sample_midpoints(double t_f_ns, int n) const {
  std::vector<double> out(n);
  const double h = t_f_ns / n;
  for (int i = 0; i < n; ++i) out[i] = value((i + 0.5) * h);
  return out;
}

MonochromaticPulse::MonochromaticPulse(double amplitude_t, double frequency_ghz,
                                       double phase_rad, double window_start_ns,
                                       double window_end_ns)
    : amplitude_t_(amplitude_t),
      frequency_ghz_(frequency_ghz),
      phase_rad_(phase_rad),
      window_start_ns_(window_start_ns),
      window_end_ns_(window_end_ns) {
  if (amplitude_t < 0.0)
    throw std::invalid_argument("MonochromaticPulse: amplitude must be >= 0");
  if (!(window_end_ns > window_start_ns))
    throw std::invalid_argument("MonochromaticPulse: window end must exceed start");
}

double MonochromaticPulse::value(double t_ns) const {
  if (t_ns < window_start_ns_ || t_ns > window_end_ns_) return 0.0;
  return amplitude_t_ * std::cos(kTwoPi * frequency_ghz_ * t_ns + phase_rad_);
}

PulseSchedule::PulseSchedule(std::vector<MonochromaticPulse> segments)
    : segments_(std::move(segments)) {}

double PulseSchedule::value(double t_ns) const {
  double f = 0.0;
  for (const auto& seg : segments_) f += seg.value(t_ns);
  return f;
}

double PulseSchedule::max_frequency_ghz() const {
  double numax = 0.0;
  for (const auto& seg : segments_) numax = std::max(numax, seg.frequency_ghz());
  return numax;
}

double PulseSchedule::duration_ns() const {
  double end = 0.0;
  for (const auto& seg : segments_) end = std::max(end, seg.window_end_ns());
  return end;
}

FourierPulse::FourierPulse(double t_f_ns, int cutoff_index,
                           Eigen::VectorXd coefficients, bool constrained)
    : t_f_ns_(t_f_ns),
      cutoff_index_(cutoff_index),
      coefficients_(std::move(coefficients)),
      constrained_(constrained) {
  if (!(t_f_ns > 0.0)) throw std::invalid_argument("FourierPulse: t_f must be > 0");
  if (cutoff_index < 1) throw std::invalid_argument("FourierPulse: cutoff index K must be >= 1");
  if (coefficients_.size() != 2 * cutoff_index + 1)
    throw std::invalid_argument("FourierPulse: expected 2K+1 coefficients");
  if (constrained_) {
    double cos_sum = 0.0;
    for (int k = 1; k <= cutoff_index_; ++k) cos_sum += coefficients_(2 * k);
    const double scale = std::max(1.0, coefficients_.cwiseAbs().maxCoeff());
    if (std::abs(coefficients_(0)) > 1e-10 * scale || std::abs(cos_sum) > 1e-10 * scale)
      throw std::invalid_argument(
          "FourierPulse: constrained pulse requires u_0 = 0 and sum of cosine "
          "coefficients = 0");
  }
}

FourierPulse FourierPulse::zero(double t_f_ns, int cutoff_index, bool constrained) {
  return FourierPulse(t_f_ns, cutoff_index,
                      Eigen::VectorXd::Zero(2 * cutoff_index + 1), constrained);
}

FourierPulse FourierPulse::from_free_coefficients(double t_f_ns, int cutoff_index,
                                                  const Eigen::VectorXd& free_coeffs) {
  if (free_coeffs.size() != 2 * cutoff_index - 1)
    throw std::invalid_argument("from_free_coefficients: expected 2K-1 values");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * cutoff_index + 1);
  double cos_sum = 0.0;
  for (int j = 0; j < free_coeffs.size(); ++j) {
    u(j + 1) = free_coeffs(j);
    if ((j + 1) % 2 == 0) cos_sum += free_coeffs(j);
  }
  u(2 * cutoff_index) = -cos_sum;
  return FourierPulse(t_f_ns, cutoff_index, std::move(u), true);
}

Eigen::VectorXd FourierPulse::free_coefficients() const {
  if (!constrained_)
    throw std::logic_error("free_coefficients: pulse is not constrained");
  return coefficients_.segment(1, 2 * cutoff_index_ - 1);
}

double FourierPulse::value(double t_ns) const {
  const double inv_sqrt_tf = 1.0 / std::sqrt(t_f_ns_);
  double f = coefficients_(0) * inv_sqrt_tf;
  const std::complex<double> w = std::polar(1.0, kTwoPi * t_ns / t_f_ns_);
  std::complex<double> wk = w;
  for (int k = 1; k <= cutoff_index_; ++k) {
    f += 2.0 * inv_sqrt_tf *
         (coefficients_(2 * k) * wk.real() + coefficients_(2 * k - 1) * wk.imag());
    wk *= w;
  }
  return f;
}

double FourierPulse::max_frequency_ghz() const {
  return static_cast<double>(cutoff_index_) / t_f_ns_;
}

std::vector<double> FourierPulse::sample_midpoints(double t_f_ns, int n) const {
  if (std::abs(t_f_ns - t_f_ns_) > 1e-12 * t_f_ns_)
    return Pulse::sample_midpoints(t_f_ns, n);  // off-window sampling, generic path
  const double inv_sqrt_tf = 1.0 / std::sqrt(t_f_ns_);
  std::vector<std::complex<double>> d(cutoff_index_ + 1);
  d[0] = coefficients_(0) * inv_sqrt_tf;
  for (int k = 1; k <= cutoff_index_; ++k)
    d[k] = 2.0 * inv_sqrt_tf *
           std::complex<double>(coefficients_(2 * k), -coefficients_(2 * k - 1));
  return detail::synthesize_midpoint_series(d, n);
}

double pi_pulse_duration(double lambda_t, std::complex<double> mu_jk, double g_factor) {
  if (!(lambda_t > 0.0))
    throw std::invalid_argument("pi_pulse_duration: amplitude must be > 0");
  const double mu = std::abs(mu_jk);
  if (mu < 1e-14)
    throw std::invalid_argument("pi_pulse_duration: transition not driven (mu_jk = 0)");
  // theta = 2 pi * lambda g muB |mu| * t reaches pi at:
  return 1.0 / (2.0 * lambda_t * g_factor * kBohrMagnetonGHzPerT * mu);
}

Eigen::VectorXd peak_amplitude_bound_residuals(const FourierPulse& pulse, double b_max_t) {
  const Eigen::VectorXd& u = pulse.coefficients();
  const double scale = 2.0 / std::sqrt(pulse.t_f_ns());
  Eigen::VectorXd r(u.size());
  for (int j = 0; j < u.size(); ++j) r(j) = std::abs(scale * u(j)) - b_max_t;
  return r;
}

std::vector<std::pair<double, double>> power_spectrum(const FourierPulse& pulse) {
  const Eigen::VectorXd& u = pulse.coefficients();
  std::vector<std::pair<double, double>> spectrum;
  spectrum.reserve(pulse.cutoff_index() + 1);
  spectrum.emplace_back(0.0, u(0) * u(0));
  for (int k = 1; k <= pulse.cutoff_index(); ++k) {
    const double nu = k / pulse.t_f_ns();
    spectrum.emplace_back(nu, 2.0 * (u(2 * k) * u(2 * k) + u(2 * k - 1) * u(2 * k - 1)));
  }
  return spectrum;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_sample_table(std::ofstream& out, const Pulse& pulse, double t_f, int n_samples) {
  out << "# samples: t_ns f_tesla\n";
  for (int i = 0; i < n_samples; ++i) {
    const double t = (n_samples == 1) ? 0.0 : t_f * i / (n_samples - 1);
    out << fmt(t) << " " << fmt(pulse.value(t)) << "\n";
  }
}

}  // namespace

void write_pulse_file(const std::filesystem::path& path, const FourierPulse& pulse,
                      int n_samples) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open pulse file for writing: " + path.string());
  out << "# spinoct pulse 1\n";
  out << "# type fourier\n";
  out << "# t_f_ns " << fmt(pulse.t_f_ns()) << "\n";
  out << "# cutoff_index " << pulse.cutoff_index() << "\n";
  out << "# constrained " << (pulse.constrained() ? 1 : 0) << "\n";
  out << "# coefficients: k u_sin u_cos\n";
  const Eigen::VectorXd& u = pulse.coefficients();
  out << "0 0 " << fmt(u(0)) << "\n";
  for (int k = 1; k <= pulse.cutoff_index(); ++k)
    out << k << " " << fmt(u(2 * k - 1)) << " " << fmt(u(2 * k)) << "\n";
  write_sample_table(out, pulse, pulse.t_f_ns(), n_samples);
}

void write_pulse_file(const std::filesystem::path& path, const PulseSchedule& schedule,
                      int n_samples) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open pulse file for writing: " + path.string());
  out << "# spinoct pulse 1\n";
  out << "# type schedule\n";
  out << "# segments: t0_ns t1_ns amplitude_T frequency_GHz phase_rad\n";
  out << "# n_segments " << schedule.segments().size() << "\n";
  for (const auto& seg : schedule.segments())
    out << fmt(seg.window_start_ns()) << " " << fmt(seg.window_end_ns()) << " "
        << fmt(seg.amplitude_t()) << " " << fmt(seg.frequency_ghz()) << " "
        << fmt(seg.phase_rad()) << "\n";
  write_sample_table(out, schedule, schedule.duration_ns(), n_samples);
}

ImportedPulse read_pulse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pulse file: " + path.string());
  std::string line;
  std::string type;
  double t_f = 0.0;
  int cutoff = 0, constrained = 1;
  std::size_t n_segments = 0;

  auto next_line = [&](std::string& dst) -> bool {
    while (std::getline(in, dst)) {
      if (!dst.empty()) return true;
    }
    return false;
  };

  while (next_line(line)) {
    std::istringstream ls(line);
    std::string hash, key;
    if (line.rfind("# ", 0) == 0) {
      ls >> hash >> key;
      if (key == "type") ls >> type;
      else if (key == "t_f_ns") ls >> t_f;
      else if (key == "cutoff_index") ls >> cutoff;
      else if (key == "constrained") ls >> constrained;
      else if (key == "n_segments") ls >> n_segments;
      else if (key == "coefficients:") break;
      else if (key == "segments:") break;
      continue;
    }
    throw ConfigError("malformed pulse file header: " + path.string());
  }

  if (type == "fourier") {
    if (cutoff < 1 || !(t_f > 0))
      throw ConfigError("pulse file missing t_f_ns/cutoff_index: " + path.string());
    Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * cutoff + 1);
    for (int k = 0; k <= cutoff; ++k) {
      if (!next_line(line)) throw ConfigError("pulse file truncated: " + path.string());
      std::istringstream ls(line);
      int kk;
      double usin, ucos;
      if (!(ls >> kk >> usin >> ucos) || kk != k)
        throw ConfigError("malformed coefficient row in " + path.string());
      if (k == 0) {
        u(0) = ucos;
      } else {
        u(2 * k - 1) = usin;
        u(2 * k) = ucos;
      }
    }
    return FourierPulse(t_f, cutoff, std::move(u), constrained != 0);
  }
  if (type == "schedule") {
    std::vector<MonochromaticPulse> segments;
    for (std::size_t s = 0; s < n_segments; ++s) {
      if (!next_line(line)) throw ConfigError("pulse file truncated: " + path.string());
      std::istringstream ls(line);
      double t0, t1, amp, nu, phase;
      if (!(ls >> t0 >> t1 >> amp >> nu >> phase))
        throw ConfigError("malformed segment row in " + path.string());
      segments.emplace_back(amp, nu, phase, t0, t1);
    }
    return PulseSchedule(std::move(segments));
  }
  throw ConfigError("unknown pulse type in " + path.string());
}

}  // namespace spinoct
