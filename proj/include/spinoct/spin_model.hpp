#pragma once

#include <complex>

#include <Eigen/Dense>

namespace spinoct {

/// Physical parameters of a single giant-spin qudit: the zero-field
/// anisotropy, the static Zeeman field and the drive-coupling direction.
struct SpinSystem {
  double spin = 0.5;           // half-integer S, dimension d = 2S+1
  double g_factor = 2.0;       // dimensionless g
  double zfs_d_mhz = 0.0;      // axial anisotropy D (MHz)
  double zfs_e_mhz = 0.0;      // rhombic anisotropy E (MHz)
  Eigen::Vector3d static_field_t = Eigen::Vector3d::Zero();   // tesla
  Eigen::Vector3d drive_direction = Eigen::Vector3d(0, 1, 0); // unit vector

  int dimension() const;

  /// Throws std::invalid_argument if 2S+1 is not an integer >= 2 or the
  /// drive direction is not unit-norm to 1e-12.
  void validate() const;

  /// GdW30 parameters: S=7/2, g=2, D=1281 MHz, E=294 MHz, B=0.15 T along x,
  /// drive along y.
  static SpinSystem gdw30();
};

struct SpinOperators {
  Eigen::MatrixXcd sx, sy, sz;
};

/// Eigenstructure of a drift Hamiltonian together with the drive couplings.
/// Energies are in GHz and ascending; eigenvector phases are fixed so the
/// largest-magnitude component of each column is real and positive.
struct SpectralData {
  Eigen::VectorXd energies;                  // GHz, ascending
  Eigen::MatrixXcd eigenvectors;             // column j = |j>
  Eigen::MatrixXd transition_frequencies;    // (j,k) -> E_k - E_j (GHz)
  Eigen::MatrixXcd transition_elements;      // mu_jk = <j| b.S |k> (dimensionless)

  int dimension() const { return static_cast<int>(energies.size()); }

  /// Largest |E_j - E_k| in the spectrum (GHz).
  double max_transition_frequency() const;
  /// Smallest adjacent-level spacing E_{j+1} - E_j (GHz).
  double min_adjacent_frequency() const;
};

/// Standard angular-momentum matrices in the m = S..-S basis; Sz diagonal.
SpinOperators spin_operators(double spin);

/// H0 = D[Sz^2 - S(S+1)/3] + E(Sx^2 - Sy^2) - g muB B.S, in GHz.
Eigen::MatrixXcd build_drift_hamiltonian(const SpinSystem& sys);

/// V = -g muB b.S, in GHz per tesla of pulse amplitude.
Eigen::MatrixXcd coupling_operator(const SpinSystem& sys);

/// Diagonalize a Hermitian drift Hamiltonian (GHz) and tabulate transition
/// frequencies and the matrix elements of the dimensionless drive projection
/// b.S in the eigenbasis. Rejects non-Hermitian input.
SpectralData diagonalize(const Eigen::MatrixXcd& hamiltonian,
                         const Eigen::MatrixXcd& drive_projection);

/// Convenience: build and diagonalize the drift Hamiltonian of a system.
SpectralData system_spectrum(const SpinSystem& sys);

}  // namespace spinoct
