#pragma once

#include <complex>
#include <vector>

namespace spinoct::detail {

/// Smallest 5-smooth integer >= n (FFT-friendly grid sizes).
int next_fast_size(int n);

/// f_i = Re sum_{k=0}^{K} d_k exp(+i 2 pi k (i + 1/2) / n), i = 0..n-1.
/// Uses FFTW when profitable, direct evaluation otherwise. K < n/2 required
/// for the FFT path; the direct path handles any K.
std::vector<double> synthesize_midpoint_series(const std::vector<std::complex<double>>& d,
                                               int n);

/// S_k = sum_{i=0}^{n-1} s_i exp(-i 2 pi k (i + 1/2) / n), k = 0..kmax.
std::vector<std::complex<double>> analyze_midpoint_series(const double* s, int n,
                                                          int kmax);

}  // namespace spinoct::detail
