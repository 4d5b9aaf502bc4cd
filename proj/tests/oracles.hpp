#pragma once

// Test-only numerical oracles, independent of the library implementation
// paths they are used to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// Cyclic Jacobi eigensolver for complex Hermitian matrices. Deliberately
// avoids Eigen's SelfAdjointEigenSolver so spectra can be cross-checked.
struct JacobiResult {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXcd eigenvectors; // columns
};

inline JacobiResult jacobi_eigensolver(Eigen::MatrixXcd a) {
  const int d = static_cast<int>(a.rows());
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(d, d);
  const double scale = std::max(1e-300, a.cwiseAbs().maxCoeff());

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off < 1e-14 * scale) break;

    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const std::complex<double> apq = a(p, q);
        const double r = std::abs(apq);
        if (r < 1e-18 * scale) continue;
        const double phase = std::arg(apq);
        const double delta = a(q, q).real() - a(p, p).real();
        // roots of r t^2 - delta t - r = 0; take the smaller magnitude one
        const double disc = std::sqrt(delta * delta + 4.0 * r * r);
        const double t1 = (delta + disc) / (2.0 * r);
        const double t2 = (delta - disc) / (2.0 * r);
        const double t = std::abs(t1) < std::abs(t2) ? t1 : t2;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const std::complex<double> eia = std::polar(1.0, phase);

        Eigen::MatrixXcd g = Eigen::MatrixXcd::Identity(d, d);
        g(p, p) = c;
        g(q, q) = c;
        g(p, q) = -s * eia;
        g(q, p) = s * std::conj(eia);
        a = g.adjoint() * a * g;
        v = v * g;
      }
    }
  }

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
  JacobiResult out;
  out.eigenvalues.resize(d);
  out.eigenvectors.resize(d, d);
  for (int j = 0; j < d; ++j) {
    out.eigenvalues(j) = a(order[j], order[j]).real();
    out.eigenvectors.col(j) = v.col(order[j]);
  }
  return out;
}

// Scaling-and-squaring Taylor matrix exponential.
inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& m) {
  const int d = static_cast<int>(m.rows());
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  Eigen::MatrixXcd b = m / std::pow(2.0, squarings);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(d, d);
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k <= 40; ++k) {
    term = (term * b) / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// Composite Simpson quadrature (n even).
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2 != 0) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
  return acc * h / 3.0;
}

// Independent lab-frame integrator: midpoint exponential of the full
// Hamiltonian H0 + f(t) V per step, each step through the Taylor expm.
// Validates the interaction-picture propagator's phase conventions.
inline Eigen::MatrixXcd lab_frame_unitary(const Eigen::MatrixXcd& h0_ghz,
                                          const Eigen::MatrixXcd& v_ghz_per_t,
                                          const std::function<double(double)>& f,
                                          double t_f_ns, int n_steps) {
  const int d = static_cast<int>(h0_ghz.rows());
  const double h = t_f_ns / n_steps;
  const double two_pi = 2.0 * std::numbers::pi;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d, d);
  const std::complex<double> mi(0.0, -1.0);
  for (int i = 0; i < n_steps; ++i) {
    const double tm = (i + 0.5) * h;
    const Eigen::MatrixXcd gen = mi * two_pi * h * (h0_ghz + f(tm) * v_ghz_per_t);
    u = (expm(gen) * u).eval();
  }
  return u;
}

}  // namespace oracles
