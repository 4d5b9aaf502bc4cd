#include "spinoct/spin_model.hpp"

#include <cmath>
#include <stdexcept>

#include "spinoct/constants.hpp"

namespace spinoct {

namespace {

bool is_half_integer_spin(double spin, int* dim_out) {
  const double twice = 2.0 * spin;
  const double rounded = std::round(twice);
  if (std::abs(twice - rounded) > 1e-9) return false;
  const int d = static_cast<int>(rounded) + 1;
  if (dim_out) *dim_out = d;
  return d >= 2;
}

}  // namespace

int SpinSystem::dimension() const {
  return static_cast<int>(std::lround(2.0 * spin)) + 1;
}

void SpinSystem::validate() const {
  int d = 0;
  if (!is_half_integer_spin(spin, &d))
    throw std::invalid_argument("spin must be a half-integer with 2S+1 >= 2");
  if (std::abs(drive_direction.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("drive_direction must be a unit vector (|b| = 1 to 1e-12)");
}

SpinSystem SpinSystem::gdw30() {
  SpinSystem sys;
  sys.spin = 3.5;
  sys.g_factor = 2.0;
  sys.zfs_d_mhz = 1281.0;
  sys.zfs_e_mhz = 294.0;
  sys.static_field_t = Eigen::Vector3d(0.15, 0.0, 0.0);
  sys.drive_direction = Eigen::Vector3d(0.0, 1.0, 0.0);
  return sys;
}

SpinOperators spin_operators(double spin) {
  int d = 0;
  if (!is_half_integer_spin(spin, &d))
    throw std::invalid_argument("spin must be a half-integer with 2S+1 >= 2");

  Eigen::MatrixXcd sp = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const double m = spin - i;
    sz(i, i) = m;
    if (i + 1 < d) {
      // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, row index i holds m = S - i
      const double mlow = spin - (i + 1);
      sp(i, i + 1) = std::sqrt(spin * (spin + 1.0) - mlow * (mlow + 1.0));
    }
  }
  const Eigen::MatrixXcd sm = sp.adjoint();
  SpinOperators ops;
  ops.sx = 0.5 * (sp + sm);
  ops.sy = std::complex<double>(0, -0.5) * (sp - sm);
  ops.sz = sz;
  return ops;
}

Eigen::MatrixXcd build_drift_hamiltonian(const SpinSystem& sys) {
  sys.validate();
  const SpinOperators ops = spin_operators(sys.spin);
  const int d = sys.dimension();
  const double s = sys.spin;
  const double d_ghz = sys.zfs_d_mhz * 1e-3;
  const double e_ghz = sys.zfs_e_mhz * 1e-3;

  Eigen::MatrixXcd h = d_ghz * (ops.sz * ops.sz -
                                s * (s + 1.0) / 3.0 * Eigen::MatrixXcd::Identity(d, d));
  h += e_ghz * (ops.sx * ops.sx - ops.sy * ops.sy);
  const Eigen::Vector3d b = sys.static_field_t;
  h -= sys.g_factor * kBohrMagnetonGHzPerT *
       (b.x() * ops.sx + b.y() * ops.sy + b.z() * ops.sz);
  return h;
}

Eigen::MatrixXcd coupling_operator(const SpinSystem& sys) {
  sys.validate();
  const SpinOperators ops = spin_operators(sys.spin);
  const Eigen::Vector3d b = sys.drive_direction;
  return -sys.g_factor * kBohrMagnetonGHzPerT *
         (b.x() * ops.sx + b.y() * ops.sy + b.z() * ops.sz);
}

double SpectralData::max_transition_frequency() const {
  return energies(energies.size() - 1) - energies(0);
}

double SpectralData::min_adjacent_frequency() const {
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j + 1 < energies.size(); ++j)
    best = std::min(best, energies(j + 1) - energies(j));
  return best;
}

SpectralData diagonalize(const Eigen::MatrixXcd& hamiltonian,
                         const Eigen::MatrixXcd& drive_projection) {
  const int d = static_cast<int>(hamiltonian.rows());
  if (hamiltonian.cols() != d)
    throw std::invalid_argument("diagonalize: matrix must be square");
  const double scale = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
  if ((hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("diagonalize: input is not Hermitian");
  if (drive_projection.rows() != d || drive_projection.cols() != d)
    throw std::invalid_argument("diagonalize: drive projection dimension mismatch");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hamiltonian);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("diagonalize: eigensolver failed");

  SpectralData out;
  out.energies = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();

  // Phase convention: largest-magnitude component of each column made real
  // and positive, so serialized results are reproducible run to run.
  for (int j = 0; j < d; ++j) {
    int imax = 0;
    double vmax = -1.0;
    for (int i = 0; i < d; ++i) {
      const double a = std::abs(out.eigenvectors(i, j));
      if (a > vmax) {
        vmax = a;
        imax = i;
      }
    }
    const std::complex<double> pivot = out.eigenvectors(imax, j);
    if (std::abs(pivot) > 0.0)
      out.eigenvectors.col(j) *= std::conj(pivot) / std::abs(pivot);
  }

  out.transition_frequencies.resize(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      out.transition_frequencies(j, k) = out.energies(k) - out.energies(j);

  out.transition_elements =
      out.eigenvectors.adjoint() * drive_projection * out.eigenvectors;
  return out;
}

SpectralData system_spectrum(const SpinSystem& sys) {
  sys.validate();
  const SpinOperators ops = spin_operators(sys.spin);
  const Eigen::Vector3d b = sys.drive_direction;
  const Eigen::MatrixXcd projection =
      b.x() * ops.sx + b.y() * ops.sy + b.z() * ops.sz;
  return diagonalize(build_drift_hamiltonian(sys), projection);
}

}  // namespace spinoct
