#include "dephasim/lattice.hpp"

#include <cmath>
#include <string>

#include "dephasim/errors.hpp"

namespace dephasim {

void LatticeSpec::validate() const {
  const std::size_t n = detunings.size();
  if (n < 2) {
    throw SpecificationError("lattice needs at least 2 sites, got " + std::to_string(n));
  }
  if (couplings.size() != n - 1) {
    throw SpecificationError("lattice couplings: expected " + std::to_string(n - 1) +
                             " entries, got " + std::to_string(couplings.size()));
  }
  if (dephasing_rates.size() != n) {
    throw SpecificationError("lattice dephasing_rates: expected " + std::to_string(n) +
                             " entries, got " + std::to_string(dephasing_rates.size()));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(dephasing_rates[j] >= 0.0)) {
      throw SpecificationError("lattice dephasing_rates[" + std::to_string(j) +
                               "] must be nonnegative");
    }
    if (!std::isfinite(detunings[j])) {
      throw SpecificationError("lattice detunings[" + std::to_string(j) + "] is not finite");
    }
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (!std::isfinite(couplings[j])) {
      throw SpecificationError("lattice couplings[" + std::to_string(j) + "] is not finite");
    }
  }
}

LatticeSpec LatticeSpec::homogeneous(std::size_t sites, double coupling, double gamma) {
  LatticeSpec spec;
  spec.detunings.assign(sites, 0.0);
  spec.couplings.assign(sites > 0 ? sites - 1 : 0, coupling);
  spec.dephasing_rates.assign(sites, gamma);
  return spec;
}

void QuasiperiodicSpec::validate() const {
  if (!(A > 0.0)) throw SpecificationError("quasiperiodic A must be positive");
  if (!(B >= 0.0)) throw SpecificationError("quasiperiodic B must be nonnegative");
  if (!std::isfinite(alpha) || !std::isfinite(theta)) {
    throw SpecificationError("quasiperiodic alpha and theta must be finite");
  }
  if (sites < 2) throw SpecificationError("quasiperiodic lattice needs at least 2 sites");
}

QuasiperiodicSpec QuasiperiodicSpec::from_total(double total, double kappa, std::size_t sites) {
  QuasiperiodicSpec q;
  q.A = total / (1.0 + kappa);
  q.B = kappa * q.A;
  q.sites = sites;
  return q;
}

Eigen::MatrixXd build_hamiltonian(const LatticeSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) h(j, j) = spec.detunings[j];
  for (Eigen::Index j = 1; j < n; ++j) {
    h(j, j - 1) = spec.couplings[j - 1];
    h(j - 1, j) = spec.couplings[j - 1];
  }
  return h;
}

double quasiperiodic_coupling(double A, double B, double alpha, double theta, double j) {
  return A + B * std::cos(2.0 * std::numbers::pi * alpha * j + theta);
}

std::vector<double> quasiperiodic_couplings(const QuasiperiodicSpec& qspec) {
  qspec.validate();
  std::vector<double> g(qspec.sites - 1);
  for (std::size_t m = 1; m < qspec.sites; ++m) {
    g[m - 1] = quasiperiodic_coupling(qspec.A, qspec.B, qspec.alpha, qspec.theta,
                                      centered_position(m, qspec.sites));
  }
  return g;
}

double infinity_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

SpectralReport spectral_report(const Eigen::MatrixXd& hamiltonian) {
  if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() == 0) {
    throw SpecificationError("spectral_report: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
  if ((hamiltonian - hamiltonian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw SpecificationError("spectral_report: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian);
  if (solver.info() != Eigen::Success) {
    throw SpecificationError("spectral_report: diagonalization failed");
  }
  SpectralReport report;
  report.eigenvalues = solver.eigenvalues();
  report.eigenvectors = solver.eigenvectors();
  report.ipr = report.eigenvectors.array().square().square().colwise().sum().transpose();
  return report;
}

}  // namespace dephasim
