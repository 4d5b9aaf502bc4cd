#include "fft_util.hpp"

#include <mutex>

#include <fftw3.h>

#include "spinoct/constants.hpp"

namespace spinoct::detail {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool fft_worthwhile(std::size_t n, std::size_t kmax) {
  return n >= 256 && (kmax + 1) * n > 1u << 16;
}

}  // namespace

int next_fast_size(int n) {
  if (n < 1) return 1;
  for (;; ++n) {
    int m = n;
    for (int p : {2, 3, 5})
      while (m % p == 0) m /= p;
    if (m == 1) return n;
  }
}

std::vector<double> synthesize_midpoint_series(const std::vector<std::complex<double>>& d,
                                               int n) {
  const int nk = static_cast<int>(d.size());
  std::vector<double> out(n, 0.0);
  if (nk == 0) return out;

  if (fft_worthwhile(n, nk - 1) && nk - 1 < n / 2) {
    // Half-sample shift folded into the bins; c2r halfcomplex transform
    // computes out_i = c_0 + 2 sum_{k>=1} Re[c_k e^{i 2 pi k i / n}].
    std::vector<std::complex<double>> bins(n / 2 + 1, 0.0);
    bins[0] = d[0];
    for (int k = 1; k < nk; ++k)
      bins[k] = 0.5 * d[k] * std::polar(1.0, kPi * k / n);
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      plan = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(bins.data()),
                                  out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
    return out;
  }

  // Direct recurrence over modes for each sample.
  for (int i = 0; i < n; ++i) {
    const double theta = kTwoPi * (i + 0.5) / n;
    const std::complex<double> w = std::polar(1.0, theta);
    std::complex<double> wk(1.0, 0.0);
    double acc = 0.0;
    for (int k = 0; k < nk; ++k) {
      acc += (d[k] * wk).real();
      wk *= w;
    }
    out[i] = acc;
  }
  return out;
}

std::vector<std::complex<double>> analyze_midpoint_series(const double* s, int n,
                                                          int kmax) {
  std::vector<std::complex<double>> out(kmax + 1, 0.0);
  if (n == 0) return out;

  if (fft_worthwhile(n, kmax) && kmax <= n / 2) {
    std::vector<double> in(s, s + n);
    std::vector<std::complex<double>> bins(n / 2 + 1);
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      plan = fftw_plan_dft_r2c_1d(n, in.data(),
                                  reinterpret_cast<fftw_complex*>(bins.data()),
                                  FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
    for (int k = 0; k <= kmax; ++k)
      out[k] = bins[k] * std::polar(1.0, -kPi * k / n);
    return out;
  }

  for (int i = 0; i < n; ++i) {
    const double theta = -kTwoPi * (i + 0.5) / n;
    const std::complex<double> w = std::polar(1.0, theta);
    std::complex<double> wk(1.0, 0.0);
    for (int k = 0; k <= kmax; ++k) {
      out[k] += s[i] * wk;
      wk *= w;
    }
  }
  return out;
}

}  // namespace spinoct::detail
