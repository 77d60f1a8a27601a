#pragma once

// Independent reference computations used only by the test suites.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using cd = std::complex<double>;

/// Dissipator assembled from the projector collapse operators
/// L_m = sqrt(G_m) |m><m| as sum_m (L rho L^+ - 1/2 {L^+ L, rho}).
inline Eigen::MatrixXcd projector_dissipator(const Eigen::MatrixXcd& rho, std::span<const double> rates) {
  const auto n = rho.rows();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    Eigen::MatrixXcd lm = Eigen::MatrixXcd::Zero(n, n);
    lm(m, m) = std::sqrt(rates[m]);
    const Eigen::MatrixXcd ll = lm.adjoint() * lm;
    out += lm * rho * lm.adjoint() - 0.5 * (ll * rho + rho * ll);
  }
  return out;
}

/// Dense Liouvillian on row-major vec(rho), for small L only.
inline Eigen::MatrixXcd liouvillian(const Eigen::MatrixXd& h, std::span<const double> rates) {
  const auto n = h.rows();
  const Eigen::MatrixXcd hc = h.cast<cd>();
  Eigen::MatrixXcd sup = Eigen::MatrixXcd::Zero(n * n, n * n);
  // Apply the generator to each basis matrix E_ab and store the result column.
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
      e(a, b) = 1.0;
      const Eigen::MatrixXcd img = cd(0, -1) * (hc * e - e * hc) + projector_dissipator(e, rates);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) sup(j * n + k, a * n + b) = img(j, k);
    }
  }
  return sup;
}

/// rho(t) = exp(L t) rho0 via the dense superoperator exponential.
inline Eigen::MatrixXcd superoperator_evolve(const Eigen::MatrixXd& h, std::span<const double> rates,
                                             const Eigen::MatrixXcd& rho0, double t) {
  const auto n = h.rows();
  Eigen::VectorXcd v(n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) v(j * n + k) = rho0(j, k);
  const Eigen::MatrixXcd prop = (liouvillian(h, rates) * cd(t, 0)).exp();
  const Eigen::VectorXcd w = prop * v;
  Eigen::MatrixXcd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) out(j, k) = w(j * n + k);
  return out;
}

/// Two-site coherent oscillation: n_1(t) = sin^2(g t).
inline double rabi_transfer(double g, double t) { return std::pow(std::sin(g * t), 2); }

/// Two-site rate equation after adiabatic elimination of the coherence:
/// hop rate k = 2 g^2 / G, n_0(t) = (1 + exp(-2 k t)) / 2.
inline double incoherent_return(double g, double gamma, double t) {
  const double k = 2.0 * g * g / gamma;
  return 0.5 * (1.0 + std::exp(-2.0 * k * t));
}

/// Exact noise average of one refresh interval of the split trajectory
/// propagator: half hop, phase kick of variance G dt per site, half hop.
inline Eigen::MatrixXcd split_channel_step(const Eigen::MatrixXd& h, double gamma, double dt,
                                           const Eigen::MatrixXcd& rho) {
  const Eigen::MatrixXcd uh = (h.cast<cd>() * cd(0, -0.5 * dt)).exp();
  Eigen::MatrixXcd r = uh * rho * uh.adjoint();
  const double decay = std::exp(-gamma * dt);
  for (Eigen::Index j = 0; j < r.rows(); ++j)
    for (Eigen::Index k = 0; k < r.cols(); ++k)
      if (j != k) r(j, k) *= decay;
  return uh * r * uh.adjoint();
}

}  // namespace oracle
