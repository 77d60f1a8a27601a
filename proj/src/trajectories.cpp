#include "dephasim/trajectories.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <thread>

#include "dephasim/errors.hpp"

namespace dephasim {

namespace {

constexpr double kNormFailure = 1e-6;
constexpr std::size_t kBlockSize = 64;

void check_grid(std::span<const double> t_grid) {
  if (t_grid.empty() || t_grid.front() != 0.0) {
    throw SpecificationError("time grid must start at 0");
  }
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > t_grid[k - 1])) {
      throw SpecificationError("time grid must be strictly increasing");
    }
  }
}

// Shared read-only state for every trajectory of one run.
class TrajectoryKernel {
 public:
  TrajectoryKernel(const LatticeSpec& spec, const NoiseSpec& noise, std::span<const double> t_grid)
      : n_(static_cast<Eigen::Index>(spec.size())), gamma_(noise.gamma), times_(t_grid.begin(), t_grid.end()) {
    spec.validate();
    check_grid(t_grid);
    if (!(noise.gamma >= 0.0)) throw SpecificationError("noise gamma must be nonnegative");
    if (!(noise.dt >= 0.0)) throw SpecificationError("noise dt must be nonnegative");
    const double cap = max_noise_interval(spec, noise.gamma);
    double target = noise.dt > 0.0 ? noise.dt : cap;
    if (target > cap * (1.0 + 1e-12)) {
      throw SpecificationError("noise dt " + std::to_string(noise.dt) +
                               " exceeds the admissible refresh interval " + std::to_string(cap));
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(build_hamiltonian(spec));
    energies_ = solver.eigenvalues();
    basis_ = solver.eigenvectors().cast<std::complex<double>>();

    for (std::size_t k = 1; k < t_grid.size(); ++k) {
      const double span = t_grid[k] - t_grid[k - 1];
      const double pieces = std::isfinite(target) ? std::max(1.0, std::ceil(span / target - 1e-9)) : 1.0;
      const double dt = span / pieces;
      if (steps_.empty() || std::abs(steps_.back().dt - dt) > 1e-12 * dt ||
          steps_.back().count != static_cast<std::size_t>(pieces)) {
        steps_.push_back({dt, static_cast<std::size_t>(pieces), propagator(0.5 * dt), propagator(dt)});
      }
      interval_step_.push_back(steps_.size() - 1);
    }
    dt_used_ = steps_.empty() ? 0.0 : steps_.front().dt;
    noise_.resize(static_cast<std::size_t>(n_));
  }

  double noise_interval() const noexcept { return dt_used_; }
  const std::vector<double>& times() const noexcept { return times_; }
  Eigen::Index sites() const noexcept { return n_; }

  // Fills `out` (rows = grid times) and returns the largest norm drift seen.
  double run(Eigen::VectorXcd psi, NoiseStream& stream, Eigen::Ref<Eigen::MatrixXd> out) {
    double drift = std::abs(psi.squaredNorm() - 1.0);
    out.row(0) = psi.cwiseAbs2().transpose();
    Eigen::VectorXcd tmp(n_);
    for (std::size_t k = 1; k < times_.size(); ++k) {
      const Step& step = steps_[interval_step_[k - 1]];
      tmp.noalias() = step.half * psi;
      psi.swap(tmp);
      for (std::size_t s = 0; s < step.count; ++s) {
        if (gamma_ > 0.0) {
          stream.sample(gamma_, step.dt, noise_);
          for (Eigen::Index j = 0; j < n_; ++j) {
            psi[j] *= std::polar(1.0, -noise_[static_cast<std::size_t>(j)] * step.dt);
          }
        }
        tmp.noalias() = (s + 1 < step.count ? step.full : step.half) * psi;
        psi.swap(tmp);
      }
      const double d = std::abs(psi.squaredNorm() - 1.0);
      drift = std::max(drift, d);
      if (!(d <= kNormFailure)) {
        throw IntegrationError("trajectory norm drifted by " + std::to_string(d), times_[k]);
      }
      out.row(static_cast<Eigen::Index>(k)) = psi.cwiseAbs2().transpose();
    }
    return drift;
  }

 private:
  struct Step {
    double dt;
    std::size_t count;
    Eigen::MatrixXcd half;
    Eigen::MatrixXcd full;
  };

  Eigen::MatrixXcd propagator(double tau) const {
    Eigen::VectorXcd phases(n_);
    for (Eigen::Index j = 0; j < n_; ++j) phases[j] = std::polar(1.0, -energies_[j] * tau);
    return basis_ * phases.asDiagonal() * basis_.adjoint();
  }

  Eigen::Index n_;
  double gamma_;
  std::vector<double> times_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXcd basis_;
  std::vector<Step> steps_;
  std::vector<std::size_t> interval_step_;
  double dt_used_ = 0.0;
  std::vector<double> noise_;
};

struct BlockStats {
  std::size_t count = 0;
  Eigen::MatrixXd mean;
  Eigen::MatrixXd m2;
  double max_drift = 0.0;
};

void accumulate(BlockStats& block, const Eigen::MatrixXd& sample) {
  if (block.count == 0) {
    block.mean = Eigen::MatrixXd::Zero(sample.rows(), sample.cols());
    block.m2 = Eigen::MatrixXd::Zero(sample.rows(), sample.cols());
  }
  ++block.count;
  const Eigen::MatrixXd delta = sample - block.mean;
  block.mean += delta / static_cast<double>(block.count);
  block.m2.array() += delta.array() * (sample - block.mean).array();
}

BlockStats merge(const BlockStats& a, const BlockStats& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  BlockStats out;
  out.count = a.count + b.count;
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double n = static_cast<double>(out.count);
  const Eigen::MatrixXd delta = b.mean - a.mean;
  out.mean = a.mean + delta * (nb / n);
  out.m2 = a.m2 + b.m2 + (delta.array().square() * (na * nb / n)).matrix();
  out.max_drift = std::max(a.max_drift, b.max_drift);
  return out;
}

BlockStats pairwise_merge(const std::vector<BlockStats>& blocks, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return blocks[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return merge(pairwise_merge(blocks, lo, mid), pairwise_merge(blocks, mid, hi));
}

std::size_t resolve_workers(std::size_t requested, std::size_t blocks) {
  std::size_t w = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(w, blocks));
}

// Runs `count` trajectories; `start_of(i, stream)` returns the initial state of
// trajectory i after any draws it needs from the trajectory's own stream.
template <typename StartFn>
BlockStats run_trajectories(TrajectoryKernel& proto, const NoiseSpec& noise,
                            std::span<const double> t_grid, std::size_t count,
                            std::uint64_t seed_offset, std::size_t workers, StartFn start_of) {
  const std::size_t n_blocks = (count + kBlockSize - 1) / kBlockSize;
  std::vector<BlockStats> blocks(n_blocks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto work = [&](TrajectoryKernel& kernel) {
    Eigen::MatrixXd pops(static_cast<Eigen::Index>(t_grid.size()), kernel.sites());
    try {
      for (std::size_t b = next++; b < n_blocks && !failed; b = next++) {
        BlockStats& block = blocks[b];
        const std::size_t end = std::min(count, (b + 1) * kBlockSize);
        for (std::size_t i = b * kBlockSize; i < end; ++i) {
          NoiseStream stream(noise.base_seed + seed_offset + i);
          Eigen::VectorXcd psi0 = start_of(i, stream);
          block.max_drift = std::max(block.max_drift, kernel.run(std::move(psi0), stream, pops));
          accumulate(block, pops);
        }
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  const std::size_t n_workers = resolve_workers(workers, n_blocks);
  if (n_workers <= 1) {
    work(proto);
  } else {
    std::vector<std::thread> pool;
    std::vector<TrajectoryKernel> kernels(n_workers - 1, proto);
    for (std::size_t w = 0; w + 1 < n_workers; ++w) {
      pool.emplace_back(work, std::ref(kernels[w]));
    }
    work(proto);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return pairwise_merge(blocks, 0, blocks.size());
}

TrajectoryEnsemble finish(const BlockStats& stats, const TrajectoryKernel& kernel) {
  TrajectoryEnsemble ens;
  ens.times = kernel.times();
  ens.n_traj = stats.count;
  ens.mean_populations = stats.mean;
  if (stats.count > 1) {
    const double n = static_cast<double>(stats.count);
    ens.stderr_populations = (stats.m2.array().max(0.0) / ((n - 1.0) * n)).sqrt().matrix();
  } else {
    ens.stderr_populations = Eigen::MatrixXd::Zero(stats.mean.rows(), stats.mean.cols());
  }
  ens.max_norm_drift = stats.max_drift;
  ens.noise_interval = kernel.noise_interval();
  return ens;
}

Eigen::VectorXcd localized(Eigen::Index sites, std::size_t k) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(sites);
  psi[static_cast<Eigen::Index>(k)] = 1.0;
  return psi;
}

}  // namespace

double max_noise_interval(const LatticeSpec& spec, double gamma) {
  const double scale = std::max(infinity_norm(build_hamiltonian(spec)), gamma);
  return scale > 0.0 ? 0.05 / scale : std::numeric_limits<double>::infinity();
}

NoiseStream::NoiseStream(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

void NoiseStream::sample(double gamma, double dt, std::span<double> out) {
  if (gamma == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double sigma = std::sqrt(gamma / dt);
  for (double& x : out) x = sigma * normal_(engine_);
}

double NoiseStream::uniform() { return unit_(engine_); }

std::vector<double> sample_noise_step(double gamma, double dt, std::size_t sites,
                                      NoiseStream& stream) {
  if (!(gamma >= 0.0) || !(dt > 0.0)) {
    throw SpecificationError("noise sampling needs gamma >= 0 and dt > 0");
  }
  std::vector<double> xi(sites);
  stream.sample(gamma, dt, xi);
  return xi;
}

TrajectoryOutput evolve_trajectory(const Eigen::VectorXcd& psi0, const LatticeSpec& spec,
                                   const NoiseSpec& noise, std::span<const double> t_grid,
                                   std::uint64_t seed) {
  TrajectoryKernel kernel(spec, noise, t_grid);
  if (psi0.size() != kernel.sites()) {
    throw SpecificationError("initial state dimension does not match lattice size");
  }
  if (std::abs(psi0.squaredNorm() - 1.0) > 1e-10) {
    throw SpecificationError("initial state must be normalized");
  }
  TrajectoryOutput out;
  out.times = kernel.times();
  out.populations.resize(static_cast<Eigen::Index>(t_grid.size()), kernel.sites());
  NoiseStream stream(seed);
  out.max_norm_drift = kernel.run(psi0, stream, out.populations);
  out.noise_interval = kernel.noise_interval();
  return out;
}

InitialMixture InitialMixture::site(std::size_t k) { return InitialMixture{{{k, 1.0}}}; }

InitialMixture InitialMixture::uniform(std::span<const std::size_t> sites) {
  InitialMixture m;
  for (std::size_t k : sites) m.branches.push_back({k, 1.0 / static_cast<double>(sites.size())});
  return m;
}

TrajectoryEnsemble run_ensemble(const InitialMixture& initial, const LatticeSpec& spec,
                                const NoiseSpec& noise, std::span<const double> t_grid,
                                const EnsembleOptions& options) {
  if (noise.n_traj == 0) throw SpecificationError("noise n_traj must be at least 1");
  if (initial.branches.empty()) throw SpecificationError("initial mixture is empty");
  double total = 0.0;
  for (const auto& b : initial.branches) {
    if (b.site >= spec.size()) {
      throw SpecificationError("initial site " + std::to_string(b.site) + " out of range");
    }
    if (!(b.weight > 0.0)) throw SpecificationError("initial mixture weights must be positive");
    total += b.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw SpecificationError("initial mixture weights must sum to 1");

  TrajectoryKernel kernel(spec, noise, t_grid);
  const Eigen::Index sites = kernel.sites();

  if (options.mixture_mode == MixtureMode::kBranchExact && initial.branches.size() > 1) {
    TrajectoryEnsemble combined;
    for (std::size_t b = 0; b < initial.branches.size(); ++b) {
      const auto& branch = initial.branches[b];
      const BlockStats stats = run_trajectories(
          kernel, noise, t_grid, noise.n_traj, b * noise.n_traj, options.workers,
          [&](std::size_t, NoiseStream&) { return localized(sites, branch.site); });
      TrajectoryEnsemble part = finish(stats, kernel);
      if (b == 0) {
        combined = part;
        combined.mean_populations *= branch.weight;
        combined.stderr_populations = (part.stderr_populations * branch.weight).array().square().matrix();
        combined.n_traj = 0;
      } else {
        combined.mean_populations += branch.weight * part.mean_populations;
        combined.stderr_populations +=
            (part.stderr_populations * branch.weight).array().square().matrix();
        combined.max_norm_drift = std::max(combined.max_norm_drift, part.max_norm_drift);
      }
      combined.n_traj += part.n_traj;
    }
    combined.stderr_populations = combined.stderr_populations.array().sqrt().matrix();
    return combined;
  }

  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& b : initial.branches) cumulative.push_back(acc += b.weight);
  const BlockStats stats = run_trajectories(
      kernel, noise, t_grid, noise.n_traj, 0, options.workers,
      [&](std::size_t, NoiseStream& stream) {
        if (initial.branches.size() == 1) return localized(sites, initial.branches[0].site);
        const double u = stream.uniform() * acc;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t pick =
            std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
        return localized(sites, initial.branches[pick].site);
      });
  return finish(stats, kernel);
}

TrajectoryEnsemble run_ensemble(const Eigen::VectorXcd& psi0, const LatticeSpec& spec,
                                const NoiseSpec& noise, std::span<const double> t_grid,
                                const EnsembleOptions& options) {
  if (noise.n_traj == 0) throw SpecificationError("noise n_traj must be at least 1");
  if (std::abs(psi0.squaredNorm() - 1.0) > 1e-10) {
    throw SpecificationError("initial state must be normalized");
  }
  TrajectoryKernel kernel(spec, noise, t_grid);
  if (psi0.size() != kernel.sites()) {
    throw SpecificationError("initial state dimension does not match lattice size");
  }
  const BlockStats stats = run_trajectories(kernel, noise, t_grid, noise.n_traj, 0, options.workers,
                                            [&](std::size_t, NoiseStream&) { return psi0; });
  return finish(stats, kernel);
}

}  // namespace dephasim
