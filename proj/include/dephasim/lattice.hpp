#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace dephasim {

/// Single-excitation chain with open boundaries. Sites are indexed 0..L-1;
/// couplings[m-1] is the bond between sites m-1 and m. All frequencies and
/// rates are angular (rad per time unit).
struct LatticeSpec {
  std::vector<double> detunings;
  std::vector<double> couplings;
  std::vector<double> dephasing_rates;

  std::size_t size() const noexcept { return detunings.size(); }

  /// Throws SpecificationError on length mismatch, L < 2, or negative rates.
  void validate() const;

  /// Homogeneous chain: zero detuning, equal couplings, uniform dephasing.
  static LatticeSpec homogeneous(std::size_t sites, double coupling, double gamma = 0.0);
};

/// Off-diagonal quasiperiodic couplings g_j = A + B cos(2 pi alpha j + theta).
struct QuasiperiodicSpec {
  double A = 1.0;
  double B = 0.0;
  double alpha = std::numbers::phi - 1.0;  // (sqrt 5 - 1) / 2
  double theta = 0.0;
  std::size_t sites = 2;

  double kappa() const { return B / A; }
  void validate() const;

  /// Splits a total coupling J = A + B at ratio kappa = B / A.
  static QuasiperiodicSpec from_total(double total, double kappa, std::size_t sites);
};

struct SpectralReport {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns are normalized eigenstates
  Eigen::VectorXd ipr;
};

Eigen::MatrixXd build_hamiltonian(const LatticeSpec& spec);

/// A + B cos(2 pi alpha j + theta) at a single centered bond index j.
double quasiperiodic_coupling(double A, double B, double alpha, double theta, double j);

/// L-1 couplings. The bond between internal sites (m-1, m) is evaluated at the
/// centered index j = m - (L-1)/2 of its right-hand site, so the pattern is
/// mirror symmetric about the middle of an odd chain.
std::vector<double> quasiperiodic_couplings(const QuasiperiodicSpec& qspec);

/// Full diagonalization of a real symmetric matrix plus inverse participation
/// ratio sum_x |v_x|^4 of every eigenvector.
SpectralReport spectral_report(const Eigen::MatrixXd& hamiltonian);

/// Maximum absolute row sum.
double infinity_norm(const Eigen::MatrixXd& m);

/// Centered coordinate of internal site m: m - (L-1)/2.
inline double centered_position(std::size_t site, std::size_t sites) {
  return static_cast<double>(site) - 0.5 * static_cast<double>(sites - 1);
}

}  // namespace dephasim
