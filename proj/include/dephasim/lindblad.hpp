#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dephasim/lattice.hpp"

namespace dephasim {

namespace detail {
class Propagator;
}

/// Hermitian, unit-trace, positive semidefinite state in the single-excitation
/// subspace. The constructor validates all three.
class DensityMatrix {
 public:
  static constexpr double kHermiticityTolerance = 1e-12;
  static constexpr double kTraceTolerance = 1e-10;
  static constexpr double kPositivityTolerance = 1e-9;

  explicit DensityMatrix(Eigen::MatrixXcd rho);

  /// |1_k><1_k| for internal site k.
  static DensityMatrix site(std::size_t sites, std::size_t k);
  /// Equal-weight incoherent mixture of the listed sites.
  static DensityMatrix uniform_mixture(std::size_t sites, std::span<const std::size_t> members);
  static DensityMatrix pure(const Eigen::VectorXcd& psi);
  static DensityMatrix maximally_mixed(std::size_t sites);

  const Eigen::MatrixXcd& matrix() const noexcept { return rho_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
  Eigen::VectorXd populations() const { return rho_.diagonal().real(); }

  double hermiticity_error() const;
  double trace_error() const;
  double min_eigenvalue() const;

 private:
  struct Unchecked {};
  DensityMatrix(Eigen::MatrixXcd rho, Unchecked) : rho_(std::move(rho)) {}
  friend class detail::Propagator;

  Eigen::MatrixXcd rho_;
};

/// Pure-dephasing dissipator in the single-excitation basis:
/// D[rho]_jk = -(G_j + G_k)/2 rho_jk off the diagonal, zero on it.
Eigen::MatrixXcd dissipator_apply(const Eigen::MatrixXcd& rho, std::span<const double> rates);

/// -i[H, rho] + D[rho] for a dense Hamiltonian.
Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const Eigen::MatrixXd& hamiltonian,
                              std::span<const double> rates);

enum class Integrator {
  kRk4Fixed,  ///< classical RK4 at the default internal step
  kAdaptive,  ///< RK4 with step-doubling error control
};

struct EvolveOptions {
  Integrator method = Integrator::kRk4Fixed;
  /// Multiplies the default internal step min(0.005/|H|_inf, 0.1/G_max).
  double step_scale = 1.0;
  double relative_tolerance = 1e-8;
  bool store_states = true;
  bool check_positivity = true;
};

struct EvolutionStats {
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t trace_renormalizations = 0;
  double max_trace_correction = 0.0;
  double internal_step = 0.0;
  // Snapshot diagnostics.
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 1.0;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<DensityMatrix> states;  // empty unless EvolveOptions::store_states
  Eigen::MatrixXd populations;        // row k holds n_j(times[k])
  EvolutionStats stats;
};

/// Default fixed RK4 step for a lattice (infinite when H = 0 and all G = 0).
double default_internal_step(const LatticeSpec& spec);

/// Propagates rho0 and returns snapshots exactly at t_grid. The grid must
/// start at 0 and be strictly increasing. Throws IntegrationError when the
/// state leaves the density-matrix set beyond tolerance or the adaptive step
/// underflows.
EvolutionResult evolve(const DensityMatrix& rho0, const LatticeSpec& spec,
                       std::span<const double> t_grid, const EvolveOptions& options = {});

/// n + 1 equally spaced times on [0, t_max].
std::vector<double> uniform_grid(double t_max, std::size_t intervals);

}  // namespace dephasim
