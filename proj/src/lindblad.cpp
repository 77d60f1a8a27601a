#include "dephasim/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "dephasim/errors.hpp"

namespace dephasim {

namespace {

constexpr std::complex<double> kI(0.0, 1.0);

// Snapshot acceptance thresholds; anything worse is an integrator failure.
constexpr double kSnapshotTraceTolerance = 1e-9;
constexpr double kSnapshotPositivityTolerance = 1e-8;
constexpr double kTraceDriftThreshold = 1e-12;

double smallest_eigenvalue(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace

DensityMatrix::DensityMatrix(Eigen::MatrixXcd rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() == 0) {
    throw SpecificationError("density matrix must be square and non-empty");
  }
  if (!rho_.allFinite()) throw SpecificationError("density matrix has non-finite entries");
  if (hermiticity_error() > kHermiticityTolerance) {
    throw SpecificationError("density matrix is not Hermitian");
  }
  if (trace_error() > kTraceTolerance) {
    throw SpecificationError("density matrix trace differs from 1");
  }
  if (min_eigenvalue() < -kPositivityTolerance) {
    throw SpecificationError("density matrix is not positive semidefinite");
  }
}

DensityMatrix DensityMatrix::site(std::size_t sites, std::size_t k) {
  const std::size_t members[] = {k};
  return uniform_mixture(sites, members);
}

DensityMatrix DensityMatrix::uniform_mixture(std::size_t sites,
                                             std::span<const std::size_t> members) {
  if (sites == 0) throw SpecificationError("density matrix needs at least one site");
  if (members.empty()) throw SpecificationError("mixture needs at least one site");
  const auto n = static_cast<Eigen::Index>(sites);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  const double w = 1.0 / static_cast<double>(members.size());
  for (std::size_t k : members) {
    if (k >= sites) {
      throw SpecificationError("site index " + std::to_string(k) + " out of range for " +
                               std::to_string(sites) + " sites");
    }
    if (rho(k, k) != 0.0) throw SpecificationError("mixture lists site " + std::to_string(k) + " twice");
    rho(k, k) = w;
  }
  return DensityMatrix(std::move(rho));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  if (std::abs(psi.squaredNorm() - 1.0) > kTraceTolerance) {
    throw SpecificationError("pure state must be normalized");
  }
  return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t sites) {
  const auto n = static_cast<Eigen::Index>(sites);
  return DensityMatrix(Eigen::MatrixXcd::Identity(n, n) / static_cast<double>(sites));
}

double DensityMatrix::hermiticity_error() const {
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::trace_error() const { return std::abs(rho_.trace() - 1.0); }

double DensityMatrix::min_eigenvalue() const { return smallest_eigenvalue(rho_); }

Eigen::MatrixXcd dissipator_apply(const Eigen::MatrixXcd& rho, std::span<const double> rates) {
  const auto n = rho.rows();
  if (rho.cols() != n || static_cast<std::size_t>(n) != rates.size()) {
    throw SpecificationError("dissipator: rate count does not match matrix dimension");
  }
  for (double g : rates) {
    if (!(g >= 0.0)) throw SpecificationError("dissipator: dephasing rates must be nonnegative");
  }
  Eigen::MatrixXcd out(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(j, k) = j == k ? std::complex<double>(0.0) : -0.5 * (rates[j] + rates[k]) * rho(j, k);
    }
  }
  return out;
}

Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const Eigen::MatrixXd& hamiltonian,
                              std::span<const double> rates) {
  if (hamiltonian.rows() != rho.rows() || hamiltonian.cols() != rho.cols()) {
    throw SpecificationError("lindblad_rhs: Hamiltonian and state dimensions differ");
  }
  const Eigen::MatrixXcd h = hamiltonian.cast<std::complex<double>>();
  return -kI * (h * rho - rho * h) + dissipator_apply(rho, rates);
}

double default_internal_step(const LatticeSpec& spec) {
  double h = std::numeric_limits<double>::infinity();
  // Coherences oscillate at eigenvalue differences, bounded by 2 |H|_inf.
  const double hnorm = 2.0 * infinity_norm(build_hamiltonian(spec));
  if (hnorm > 0.0) h = std::min(h, 0.01 / hnorm);
  const double gmax = *std::max_element(spec.dephasing_rates.begin(), spec.dephasing_rates.end());
  if (gmax > 0.0) h = std::min(h, 0.1 / gmax);
  return h;
}

std::vector<double> uniform_grid(double t_max, std::size_t intervals) {
  if (intervals == 0 || !(t_max > 0.0)) {
    throw SpecificationError("time grid needs t_max > 0 and at least one interval");
  }
  std::vector<double> t(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) {
    t[k] = t_max * static_cast<double>(k) / static_cast<double>(intervals);
  }
  return t;
}

namespace detail {

// RK4 stepper exploiting the tridiagonal Hamiltonian: one right-hand side
// costs O(L^2) instead of the O(L^3) of dense products.
class Propagator {
 public:
  Propagator(const LatticeSpec& spec, const EvolveOptions& options)
      : options_(options),
        n_(static_cast<Eigen::Index>(spec.size())),
        diag_(Eigen::Map<const Eigen::VectorXd>(spec.detunings.data(), n_)),
        bond_(Eigen::Map<const Eigen::VectorXd>(spec.couplings.data(), n_ - 1)),
        decay_(n_, n_) {
    for (Eigen::Index k = 0; k < n_; ++k) {
      for (Eigen::Index j = 0; j < n_; ++j) {
        decay_(j, k) = j == k ? 0.0 : -0.5 * (spec.dephasing_rates[j] + spec.dephasing_rates[k]);
      }
    }
    step_ = options.step_scale * default_internal_step(spec);
    for (auto* m : {&k1_, &k2_, &k3_, &k4_, &stage_, &hr_, &rh_}) m->resize(n_, n_);
  }

  double internal_step() const noexcept { return step_; }

  void rhs(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) {
    const Eigen::Index m = n_ - 1;
    hr_.noalias() = diag_.asDiagonal() * rho;
    hr_.topRows(m).noalias() += bond_.asDiagonal() * rho.bottomRows(m);
    hr_.bottomRows(m).noalias() += bond_.asDiagonal() * rho.topRows(m);
    rh_.noalias() = rho * diag_.asDiagonal();
    rh_.leftCols(m).noalias() += rho.rightCols(m) * bond_.asDiagonal();
    rh_.rightCols(m).noalias() += rho.leftCols(m) * bond_.asDiagonal();
    out = -kI * (hr_ - rh_) + (decay_.array() * rho.array()).matrix();
  }

  void rk4_step(Eigen::MatrixXcd& rho, double h) {
    rhs(rho, k1_);
    stage_ = rho + (0.5 * h) * k1_;
    rhs(stage_, k2_);
    stage_ = rho + (0.5 * h) * k2_;
    rhs(stage_, k3_);
    stage_ = rho + h * k3_;
    rhs(stage_, k4_);
    rho += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

  // Re-Hermitize and, if the trace has drifted, renormalize.
  void housekeeping(Eigen::MatrixXcd& rho, double t, EvolutionStats& stats) {
    if (!rho.allFinite()) throw IntegrationError("density matrix became non-finite", t);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const double tr = rho.trace().real();
    const double drift = std::abs(tr - 1.0);
    if (drift > kTraceDriftThreshold) {
      rho /= tr;
      ++stats.trace_renormalizations;
      stats.max_trace_correction = std::max(stats.max_trace_correction, drift);
    }
  }

  void advance_fixed(Eigen::MatrixXcd& rho, double t0, double t1, EvolutionStats& stats) {
    if (!std::isfinite(step_)) {
      return;  // H = 0 and no dephasing: the state is stationary
    }
    double t = t0;
    while (t < t1) {
      double h = std::min(step_, t1 - t);
      if (t1 - (t + h) < 1e-9 * step_) h = t1 - t;
      rk4_step(rho, h);
      t = (h == t1 - t) ? t1 : t + h;
      ++stats.steps;
      housekeeping(rho, t, stats);
    }
  }

  void advance_adaptive(Eigen::MatrixXcd& rho, double t0, double t1, double& h,
                        EvolutionStats& stats) {
    if (!std::isfinite(h)) h = t1 - t0;
    double t = t0;
    const double span = t1 - t0;
    while (t < t1) {
      const bool last = h >= t1 - t;
      const double step = last ? t1 - t : h;
      full_ = rho;
      rk4_step(full_, step);
      half_ = rho;
      rk4_step(half_, 0.5 * step);
      rk4_step(half_, 0.5 * step);
      const double scale = std::max(half_.cwiseAbs().maxCoeff(), 1e-300);
      const double err = (half_ - full_).cwiseAbs().maxCoeff() / 15.0;
      const double tol = options_.relative_tolerance * scale;
      const double factor = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 2.0;
      if (err <= tol) {
        rho = half_;
        t = last ? t1 : t + step;
        ++stats.steps;
        housekeeping(rho, t, stats);
        if (!last) h = step * std::clamp(factor, 0.2, 2.0);
      } else {
        ++stats.rejected_steps;
        h = step * std::clamp(factor, 0.1, 0.9);
        if (h < 1e-14 * std::max(std::abs(t), span)) {
          throw IntegrationError("adaptive step size underflow", t);
        }
      }
    }
  }

  DensityMatrix snapshot(const Eigen::MatrixXcd& rho) const { return DensityMatrix(rho, {}); }

 private:
  EvolveOptions options_;
  Eigen::Index n_;
  Eigen::VectorXd diag_;
  Eigen::VectorXd bond_;
  Eigen::MatrixXd decay_;
  double step_ = 0.0;
  Eigen::MatrixXcd k1_, k2_, k3_, k4_, stage_, hr_, rh_, full_, half_;
};

}  // namespace detail

EvolutionResult evolve(const DensityMatrix& rho0, const LatticeSpec& spec,
                       std::span<const double> t_grid, const EvolveOptions& options) {
  spec.validate();
  if (rho0.dim() != spec.size()) {
    throw SpecificationError("initial state dimension " + std::to_string(rho0.dim()) +
                             " does not match lattice size " + std::to_string(spec.size()));
  }
  if (t_grid.empty() || t_grid.front() != 0.0) {
    throw SpecificationError("time grid must start at 0");
  }
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > t_grid[k - 1])) {
      throw SpecificationError("time grid must be strictly increasing");
    }
  }
  if (!(options.step_scale > 0.0) || !(options.relative_tolerance > 0.0)) {
    throw SpecificationError("integrator step_scale and relative_tolerance must be positive");
  }

  detail::Propagator prop(spec, options);
  EvolutionResult result;
  result.times.assign(t_grid.begin(), t_grid.end());
  result.populations.resize(static_cast<Eigen::Index>(t_grid.size()),
                            static_cast<Eigen::Index>(spec.size()));
  result.stats.internal_step = prop.internal_step();
  if (options.store_states) result.states.reserve(t_grid.size());

  Eigen::MatrixXcd rho = rho0.matrix();
  double adaptive_h = prop.internal_step();
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (k > 0) {
      if (options.method == Integrator::kAdaptive) {
        prop.advance_adaptive(rho, t_grid[k - 1], t_grid[k], adaptive_h, result.stats);
      } else {
        prop.advance_fixed(rho, t_grid[k - 1], t_grid[k], result.stats);
      }
    }
    auto& st = result.stats;
    const double trace_err = std::abs(rho.trace() - 1.0);
    const double herm_err = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    st.max_trace_error = std::max(st.max_trace_error, trace_err);
    st.max_hermiticity_error = std::max(st.max_hermiticity_error, herm_err);
    if (trace_err > kSnapshotTraceTolerance) {
      throw IntegrationError("trace left tolerance", t_grid[k]);
    }
    if (options.check_positivity) {
      const double lam = smallest_eigenvalue(rho);
      st.min_eigenvalue = std::min(st.min_eigenvalue, lam);
      if (lam < -kSnapshotPositivityTolerance) {
        throw IntegrationError("density matrix lost positivity (min eigenvalue " +
                                   std::to_string(lam) + ")",
                               t_grid[k]);
      }
    }
    result.populations.row(static_cast<Eigen::Index>(k)) = rho.diagonal().real().transpose();
    if (options.store_states) result.states.push_back(prop.snapshot(rho));
  }
  return result;
}

}  // namespace dephasim
