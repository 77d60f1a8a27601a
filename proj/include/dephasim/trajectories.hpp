#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dephasim/lattice.hpp"

namespace dephasim {

/// White-noise frequency modulation used to unravel uniform pure dephasing.
struct NoiseSpec {
  double gamma = 0.0;  ///< effective dephasing rate applied to every site
  double dt = 0.0;     ///< refresh interval; 0 selects the largest admissible value
  std::size_t n_traj = 1;
  std::uint64_t base_seed = 0;
};

/// Largest admissible refresh interval: 0.05 / max(|H|_inf, gamma).
double max_noise_interval(const LatticeSpec& spec, double gamma);

/// Random stream owned by one trajectory. Trajectory i of an ensemble uses
/// seed base_seed + i; draws within a trajectory follow the step order.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed);

  /// One refresh of the piecewise-constant noise: L independent Gaussians with
  /// mean 0 and variance gamma / dt.
  void sample(double gamma, double dt, std::span<double> out);
  double uniform();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

std::vector<double> sample_noise_step(double gamma, double dt, std::size_t sites,
                                      NoiseStream& stream);

struct TrajectoryOutput {
  std::vector<double> times;
  Eigen::MatrixXd populations;  // row k holds |psi_j(times[k])|^2
  double max_norm_drift = 0.0;
  double noise_interval = 0.0;  // refresh interval actually used
};

/// Schrodinger evolution under H + diag(xi(t)), xi refreshed every noise
/// interval. Each interval is propagated by the symmetric split
/// exp(-iH dt/2) exp(-i xi dt) exp(-iH dt/2) with exact factors, so the norm
/// is conserved to rounding. The refresh interval is shrunk so that every
/// grid spacing holds a whole number of intervals.
TrajectoryOutput evolve_trajectory(const Eigen::VectorXcd& psi0, const LatticeSpec& spec,
                                   const NoiseSpec& noise, std::span<const double> t_grid,
                                   std::uint64_t seed);

/// Weighted set of localized pure states |1_site>.
struct InitialMixture {
  struct Branch {
    std::size_t site;
    double weight;
  };
  std::vector<Branch> branches;

  static InitialMixture site(std::size_t k);
  static InitialMixture uniform(std::span<const std::size_t> sites);
};

enum class MixtureMode {
  kSampled,      ///< each trajectory draws its starting site from the weights
  kBranchExact,  ///< every branch gets n_traj trajectories; means are weighted
};

struct EnsembleOptions {
  MixtureMode mixture_mode = MixtureMode::kSampled;
  std::size_t workers = 0;  ///< 0 picks hardware concurrency
};

struct TrajectoryEnsemble {
  std::vector<double> times;
  Eigen::MatrixXd mean_populations;
  Eigen::MatrixXd stderr_populations;
  std::size_t n_traj = 0;
  double max_norm_drift = 0.0;
  double noise_interval = 0.0;
};

/// Ensemble average over noise realizations (and initial-state draws).
/// Results are bit-identical for any worker count: trajectories are grouped
/// into fixed index blocks whose statistics are merged in a fixed pairwise
/// order.
TrajectoryEnsemble run_ensemble(const InitialMixture& initial, const LatticeSpec& spec,
                                const NoiseSpec& noise, std::span<const double> t_grid,
                                const EnsembleOptions& options = {});

TrajectoryEnsemble run_ensemble(const Eigen::VectorXcd& psi0, const LatticeSpec& spec,
                                const NoiseSpec& noise, std::span<const double> t_grid,
                                const EnsembleOptions& options = {});

}  // namespace dephasim
