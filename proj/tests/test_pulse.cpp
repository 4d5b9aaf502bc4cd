#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "spinoct/constants.hpp"
#include "spinoct/pulse.hpp"
#include "spinoct/spin_model.hpp"

using namespace spinoct;

namespace {

FourierPulse random_constrained_pulse(double t_f, int k, unsigned seed, double scale) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::VectorXd free(2 * k - 1);
  for (int i = 0; i < free.size(); ++i) free(i) = dist(rng);
  return FourierPulse::from_free_coefficients(t_f, k, free);
}

}  // namespace

TEST_CASE("fourier pulse: zero coefficients give zero field") {
  const FourierPulse pulse = FourierPulse::zero(12.0, 6);
  for (double t : {0.0, 1.7, 6.0, 12.0}) CHECK(pulse.value(t) == 0.0);
}

TEST_CASE("fourier pulse: single cosine coefficient at t = 0") {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * 3 + 1);
  u(2) = 0.4;  // u_2, the k=1 cosine coefficient
  const FourierPulse pulse(9.0, 3, u, false);
  CHECK(pulse.value(0.0) == doctest::Approx(2.0 * 0.4 / std::sqrt(9.0)).epsilon(1e-14));
}

TEST_CASE("fourier pulse: constrained pulses start and end at zero") {
  const FourierPulse pulse = random_constrained_pulse(7.3, 9, 42, 1e-3);
  CHECK(std::abs(pulse.value(0.0)) < 1e-12);
  CHECK(std::abs(pulse.value(7.3)) < 1e-12);
  // average is zero as well (u_0 = 0): quadrature over [0, t_f]
  const double mean =
      oracles::simpson([&](double t) { return pulse.value(t); }, 0.0, 7.3, 4000);
  CHECK(std::abs(mean) < 1e-10);
}

TEST_CASE("fourier pulse: constrained constructor validates constraints") {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(5);
  u(2) = 1.0;  // cosine sum nonzero
  CHECK_THROWS_AS(FourierPulse(5.0, 2, u, true), std::invalid_argument);
  u(4) = -1.0;
  CHECK_NOTHROW(FourierPulse(5.0, 2, u, true));
  u(0) = 0.1;  // u_0 nonzero
  CHECK_THROWS_AS(FourierPulse(5.0, 2, u, true), std::invalid_argument);
}

TEST_CASE("fourier pulse: midpoint sampling matches direct evaluation (FFT path)") {
  const FourierPulse pulse = random_constrained_pulse(11.0, 40, 7, 2e-4);
  const int n = 4096;  // large enough to take the FFT path
  const auto samples = pulse.sample_midpoints(11.0, n);
  const double h = 11.0 / n;
  double max_diff = 0.0;
  for (int i = 0; i < n; i += 37)
    max_diff = std::max(max_diff, std::abs(samples[i] - pulse.value((i + 0.5) * h)));
  CHECK(max_diff < 1e-13);
}

TEST_CASE("monochromatic pulse: window and phase") {
  const MonochromaticPulse pulse(2e-3, 1.5, 0.3, 1.0, 4.0);
  CHECK(pulse.value(0.5) == 0.0);
  CHECK(pulse.value(4.5) == 0.0);
  CHECK(pulse.value(2.0) ==
        doctest::Approx(2e-3 * std::cos(kTwoPi * 1.5 * 2.0 + 0.3)).epsilon(1e-14));
  CHECK_THROWS_AS(MonochromaticPulse(-1e-3, 1.0, 0.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(MonochromaticPulse(1e-3, 1.0, 0.0, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("pi pulse duration: scaling and special values") {
  const double t1 = pi_pulse_duration(1e-3, {0.5, 0.0}, 2.0);
  const double t2 = pi_pulse_duration(2e-3, {0.5, 0.0}, 2.0);
  CHECK(t1 == doctest::Approx(2.0 * t2).epsilon(1e-14));

  // S=1/2 with drive along y: |mu_01| = 1/2 in the Zeeman eigenbasis.
  SpinSystem sys;
  sys.spin = 0.5;
  sys.g_factor = 2.0;
  sys.static_field_t = Eigen::Vector3d(0, 0, 0.1);
  sys.drive_direction = Eigen::Vector3d(0, 1, 0);
  const SpectralData sd = system_spectrum(sys);
  CHECK(std::abs(sd.transition_elements(0, 1)) == doctest::Approx(0.5).epsilon(1e-12));

  // GdW30 6->7 from the independently computed coupling element.
  const SpectralData gd = system_spectrum(SpinSystem::gdw30());
  const auto jac = oracles::jacobi_eigensolver(build_drift_hamiltonian(SpinSystem::gdw30()));
  const Eigen::MatrixXcd mu_oracle =
      jac.eigenvectors.adjoint() * spin_operators(3.5).sy * jac.eigenvectors;
  const double expected =
      1.0 / (2.0 * 1e-3 * 2.0 * kBohrMagnetonGHzPerT * std::abs(mu_oracle(6, 7)));
  CHECK(pi_pulse_duration(1e-3, gd.transition_elements(6, 7), 2.0) ==
        doctest::Approx(expected).epsilon(1e-9));

  CHECK_THROWS_AS(pi_pulse_duration(1e-3, {0.0, 0.0}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(pi_pulse_duration(0.0, {0.5, 0.0}, 2.0), std::invalid_argument);
}

TEST_CASE("peak amplitude residuals") {
  const double t_f = 16.0;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * 2 + 1);
  const FourierPulse zero(t_f, 2, u, false);
  const Eigen::VectorXd r0 = peak_amplitude_bound_residuals(zero, 0.02);
  for (int i = 0; i < r0.size(); ++i) CHECK(r0(i) == doctest::Approx(-0.02));

  u(3) = 0.02 * std::sqrt(t_f) / 2.0;  // exactly at the bound
  const FourierPulse at_bound(t_f, 2, u, false);
  const Eigen::VectorXd r1 = peak_amplitude_bound_residuals(at_bound, 0.02);
  CHECK(std::abs(r1(3)) < 1e-12);

  // paper-scale gate pulses are feasible under the 20 mT bound
  const FourierPulse gate_scale = random_constrained_pulse(10.8, 86, 3,
                                                           0.25 * 0.02 * std::sqrt(10.8));
  const Eigen::VectorXd r2 = peak_amplitude_bound_residuals(gate_scale, 0.02);
  CHECK(r2.maxCoeff() <= 0.0);
}

TEST_CASE("power spectrum: lines and Parseval against quadrature") {
  const double t_f = 8.0;

  SUBCASE("single sine term gives a single line") {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * 4 + 1);
    u(2 * 3 - 1) = 0.7;
    const FourierPulse pulse(t_f, 4, u, false);
    const auto spec = power_spectrum(pulse);
    CHECK(spec.size() == 5);
    for (const auto& [nu, power] : spec) {
      if (std::abs(nu - 3.0 / t_f) < 1e-12)
        CHECK(power == doctest::Approx(2.0 * 0.7 * 0.7));
      else
        CHECK(power == 0.0);
    }
  }

  SUBCASE("constrained pulse has no zero-frequency power") {
    const FourierPulse pulse = random_constrained_pulse(t_f, 6, 11, 1e-3);
    CHECK(power_spectrum(pulse).front().second == 0.0);
  }

  SUBCASE("total power equals integral of f^2") {
    const FourierPulse pulse = random_constrained_pulse(t_f, 6, 19, 1e-3);
    double total = 0.0;
    for (const auto& [nu, power] : power_spectrum(pulse)) total += power;
    const double integral = oracles::simpson(
        [&](double t) { return pulse.value(t) * pulse.value(t); }, 0.0, t_f, 20000);
    CHECK(total == doctest::Approx(integral).epsilon(1e-10));
  }
}

TEST_CASE("basis orthogonality: norms are {1, sqrt(2), sqrt(2), ...}") {
  const double t_f = 5.0;
  const int k = 3;
  auto basis = [&](int m, double t) {
    if (m == 0) return 1.0 / std::sqrt(t_f);
    const int mode = (m + 1) / 2;
    const double w = kTwoPi * mode / t_f;
    const double amp = 2.0 / std::sqrt(t_f);
    return m % 2 == 1 ? amp * std::sin(w * t) : amp * std::cos(w * t);
  };
  for (int a = 0; a <= 2 * k; ++a) {
    for (int b = a; b <= 2 * k; ++b) {
      const double overlap = oracles::simpson(
          [&](double t) { return basis(a, t) * basis(b, t); }, 0.0, t_f, 8000);
      if (a != b)
        CHECK(std::abs(overlap) < 1e-10);
      else
        CHECK(overlap == doctest::Approx(a == 0 ? 1.0 : 2.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("pulse files round-trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "spinoct_pulse_io";
  fs::create_directories(dir);

  SUBCASE("fourier") {
    const FourierPulse pulse = random_constrained_pulse(6.25, 5, 33, 1e-3);
    const fs::path path = dir / "fourier.txt";
    write_pulse_file(path, pulse, 64);
    const ImportedPulse imported = read_pulse_file(path);
    REQUIRE(std::holds_alternative<FourierPulse>(imported));
    const FourierPulse& back = std::get<FourierPulse>(imported);
    CHECK(back.t_f_ns() == pulse.t_f_ns());
    CHECK(back.cutoff_index() == pulse.cutoff_index());
    CHECK(back.constrained() == pulse.constrained());
    CHECK((back.coefficients() - pulse.coefficients()).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("schedule") {
    PulseSchedule schedule({MonochromaticPulse(1e-3, 2.0, 0.25, 0.0, 3.5),
                            MonochromaticPulse(2e-3, 4.5, -0.5, 3.5, 5.0)});
    const fs::path path = dir / "schedule.txt";
    write_pulse_file(path, schedule, 64);
    const ImportedPulse imported = read_pulse_file(path);
    REQUIRE(std::holds_alternative<PulseSchedule>(imported));
    const PulseSchedule& back = std::get<PulseSchedule>(imported);
    REQUIRE(back.segments().size() == 2);
    CHECK(back.segments()[1].frequency_ghz() == 4.5);
    CHECK(back.duration_ns() == 5.0);
    for (double t : {0.1, 1.7, 3.6, 4.9})
      CHECK(back.value(t) == doctest::Approx(schedule.value(t)).epsilon(1e-15));
  }
}
