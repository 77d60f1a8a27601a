#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dephasim/errors.hpp"
#include "dephasim/lindblad.hpp"
#include "dephasim/trajectories.hpp"
#include "oracles.hpp"

using namespace dephasim;

namespace {

Eigen::VectorXcd site_state(Eigen::Index n, Eigen::Index k) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
  psi[k] = 1.0;
  return psi;
}

}  // namespace

TEST_CASE("noise samples") {
  SUBCASE("zero rate gives exact zeros") {
    NoiseStream s(1);
    for (double x : sample_noise_step(0.0, 0.01, 9, s)) CHECK(x == 0.0);
  }
  SUBCASE("variance gamma / dt and independent sites") {
    const double gamma = 2.0;
    const double dt = 0.01;
    const std::size_t draws = 1000000;
    NoiseStream s(42);
    double sum0 = 0.0, sq0 = 0.0, sq1 = 0.0, cross = 0.0;
    std::vector<double> xi(2);
    for (std::size_t i = 0; i < draws; ++i) {
      s.sample(gamma, dt, xi);
      sum0 += xi[0];
      sq0 += xi[0] * xi[0];
      sq1 += xi[1] * xi[1];
      cross += xi[0] * xi[1];
    }
    const double n = static_cast<double>(draws);
    const double var0 = sq0 / n - (sum0 / n) * (sum0 / n);
    CHECK(std::abs(var0 / (gamma / dt) - 1.0) <= 0.01);
    CHECK(std::abs(sq1 / n / (gamma / dt) - 1.0) <= 0.01);
    const double corr = cross / std::sqrt(sq0 * sq1);
    CHECK(std::abs(corr) <= 3.0 / std::sqrt(n));
  }
  SUBCASE("invalid arguments") {
    NoiseStream s(1);
    CHECK_THROWS_AS(sample_noise_step(-1.0, 0.1, 2, s), SpecificationError);
    CHECK_THROWS_AS(sample_noise_step(1.0, 0.0, 2, s), SpecificationError);
  }
}

TEST_CASE("noiseless trajectory equals coherent Lindblad evolution") {
  const auto spec = LatticeSpec::homogeneous(7, 1.0);
  const auto grid = uniform_grid(8.0, 80);
  NoiseSpec noise;
  const TrajectoryOutput traj = evolve_trajectory(site_state(7, 3), spec, noise, grid, 5);
  const EvolutionResult ref = evolve(DensityMatrix::site(7, 3), spec, grid);
  CHECK((traj.populations - ref.populations).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("single noisy trajectory conserves norm") {
  const auto spec = LatticeSpec::homogeneous(2, 1.0);
  NoiseSpec noise{30.0, 0.0, 1, 0};
  const auto grid = uniform_grid(10.0, 100);
  const TrajectoryOutput traj = evolve_trajectory(site_state(2, 0), spec, noise, grid, 17);
  for (Eigen::Index k = 0; k < traj.populations.rows(); ++k) {
    REQUIRE(std::abs(traj.populations.row(k).sum() - 1.0) <= 1e-10);
  }
  CHECK(traj.max_norm_drift <= 1e-9);
  CHECK(traj.noise_interval <= max_noise_interval(spec, 30.0));
}

TEST_CASE("noise cannot move population between uncoupled sites") {
  LatticeSpec spec{{0.0, 0.0}, {0.0}, {0.0, 0.0}};
  Eigen::VectorXcd psi(2);
  psi << 0.6, std::complex<double>(0.0, 0.8);
  const TrajectoryOutput traj = evolve_trajectory(psi, spec, NoiseSpec{5.0, 0.01, 1, 0}, uniform_grid(3.0, 30), 3);
  for (Eigen::Index k = 0; k < traj.populations.rows(); ++k) {
    REQUIRE(traj.populations(k, 0) == doctest::Approx(0.36).epsilon(1e-12));
    REQUIRE(traj.populations(k, 1) == doctest::Approx(0.64).epsilon(1e-12));
  }
}

TEST_CASE("trajectories are reproducible from their seed") {
  const auto spec = LatticeSpec::homogeneous(5, 1.0);
  const NoiseSpec noise{3.0, 0.0, 1, 0};
  const auto grid = uniform_grid(4.0, 20);
  const auto a = evolve_trajectory(site_state(5, 2), spec, noise, grid, 99);
  const auto b = evolve_trajectory(site_state(5, 2), spec, noise, grid, 99);
  const auto c = evolve_trajectory(site_state(5, 2), spec, noise, grid, 100);
  CHECK(a.populations == b.populations);
  CHECK(a.populations != c.populations);
}

TEST_CASE("trajectory preconditions") {
  const auto spec = LatticeSpec::homogeneous(3, 1.0);
  const auto grid = uniform_grid(1.0, 4);
  CHECK_THROWS_AS(evolve_trajectory(site_state(3, 0) * 2.0, spec, NoiseSpec{}, grid, 0), SpecificationError);
  CHECK_THROWS_AS(evolve_trajectory(site_state(4, 0), spec, NoiseSpec{}, grid, 0), SpecificationError);
  // Refresh interval above 0.05 / max(|H|, G).
  CHECK_THROWS_AS(evolve_trajectory(site_state(3, 0), spec, NoiseSpec{1.0, 0.1, 1, 0}, grid, 0),
                  SpecificationError);
  CHECK_THROWS_AS(run_ensemble(site_state(3, 0), spec, NoiseSpec{1.0, 0.0, 0, 0}, grid), SpecificationError);
}

TEST_CASE("one-trajectory ensemble") {
  const auto spec = LatticeSpec::homogeneous(4, 1.0);
  const NoiseSpec noise{2.0, 0.0, 1, 1234};
  const auto grid = uniform_grid(3.0, 15);
  const TrajectoryEnsemble ens = run_ensemble(InitialMixture::site(1), spec, noise, grid);
  const TrajectoryOutput single = evolve_trajectory(site_state(4, 1), spec, noise, grid, 1234);
  CHECK(ens.n_traj == 1);
  CHECK(ens.stderr_populations.cwiseAbs().maxCoeff() == 0.0);
  CHECK(ens.mean_populations == single.populations);
}

TEST_CASE("ensemble results do not depend on the worker count") {
  const auto spec = LatticeSpec::homogeneous(5, 1.0);
  const NoiseSpec noise{3.0, 0.0, 300, 77};
  const auto grid = uniform_grid(2.0, 10);
  const std::size_t sites[] = {1, 2, 4};
  const auto initial = InitialMixture::uniform(sites);
  EnsembleOptions one;
  one.workers = 1;
  EnsembleOptions many;
  many.workers = 4;
  const auto a = run_ensemble(initial, spec, noise, grid, one);
  const auto b = run_ensemble(initial, spec, noise, grid, many);
  CHECK(a.mean_populations == b.mean_populations);
  CHECK(a.stderr_populations == b.stderr_populations);
}

TEST_CASE("mixed start is sampled with the mixture weights") {
  const auto spec = LatticeSpec::homogeneous(7, 1.0, 3.0);
  const std::size_t sites[] = {3, 4, 5, 6};
  const auto grid = uniform_grid(1.0, 4);
  const TrajectoryEnsemble ens = run_ensemble(InitialMixture::uniform(sites), spec, NoiseSpec{3.0, 0.0, 4000, 5}, grid);
  for (Eigen::Index j = 0; j < 7; ++j) {
    const double want = j >= 3 ? 0.25 : 0.0;
    CHECK(std::abs(ens.mean_populations(0, j) - want) <= 3.0 * ens.stderr_populations(0, j) + 1e-15);
  }
  for (Eigen::Index k = 0; k < ens.mean_populations.rows(); ++k) {
    CHECK(std::abs(ens.mean_populations.row(k).sum() - 1.0) <= 1e-9);
  }

  EnsembleOptions exact;
  exact.mixture_mode = MixtureMode::kBranchExact;
  const TrajectoryEnsemble branch = run_ensemble(InitialMixture::uniform(sites), spec, NoiseSpec{3.0, 0.0, 500, 5}, grid, exact);
  for (Eigen::Index j = 3; j < 7; ++j) CHECK(branch.mean_populations(0, j) == 0.25);
  CHECK(branch.n_traj == 2000);
}

TEST_CASE("standard error shrinks as one over root n") {
  const auto spec = LatticeSpec::homogeneous(5, 1.0);
  const auto grid = uniform_grid(3.0, 6);
  const auto small = run_ensemble(InitialMixture::site(2), spec, NoiseSpec{3.0, 0.0, 2000, 1}, grid);
  const auto large = run_ensemble(InitialMixture::site(2), spec, NoiseSpec{3.0, 0.0, 8000, 1}, grid);
  const double ratio = large.stderr_populations.bottomRows(5).sum() / small.stderr_populations.bottomRows(5).sum();
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.1));
  CHECK(small.stderr_populations.minCoeff() >= 0.0);
}

TEST_CASE("split noise average stays within 1e-3 of the Lindblad dynamics") {
  // The exact noise average of one refresh interval is a deterministic
  // channel; iterate it and compare to the master equation.
  for (double ratio : {3.0, 30.0}) {
    const double gamma = ratio;
    const auto spec = LatticeSpec::homogeneous(7, 1.0, gamma);
    const auto grid = uniform_grid(10.0, 50);
    const double dt_cap = max_noise_interval(spec, gamma);
    const double spacing = grid[1];
    const int pieces = static_cast<int>(std::ceil(spacing / dt_cap - 1e-9));
    const double dt = spacing / pieces;
    const EvolutionResult ref = evolve(DensityMatrix::site(7, 3), spec, grid);
    Eigen::MatrixXcd rho = DensityMatrix::site(7, 3).matrix();
    const Eigen::MatrixXd h = build_hamiltonian(spec);
    double worst = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      for (int p = 0; p < pieces; ++p) rho = oracle::split_channel_step(h, gamma, dt, rho);
      worst = std::max(worst, (rho.diagonal().real().transpose() - ref.populations.row(static_cast<Eigen::Index>(k)))
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("ensemble mean converges to the noise-averaged channel") {
  const double gamma = 2.0;
  const auto spec = LatticeSpec::homogeneous(4, 1.0, gamma);
  const auto grid = uniform_grid(2.0, 4);
  const TrajectoryEnsemble ens = run_ensemble(InitialMixture::site(0), spec, NoiseSpec{gamma, 0.0, 6000, 3}, grid);
  Eigen::MatrixXcd rho = DensityMatrix::site(4, 0).matrix();
  const Eigen::MatrixXd h = build_hamiltonian(spec);
  const int pieces = static_cast<int>(std::ceil(grid[1] / max_noise_interval(spec, gamma) - 1e-9));
  CHECK(ens.noise_interval == doctest::Approx(grid[1] / pieces));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    for (int p = 0; p < pieces; ++p) rho = oracle::split_channel_step(h, gamma, ens.noise_interval, rho);
    for (Eigen::Index j = 0; j < 4; ++j) {
      const auto kk = static_cast<Eigen::Index>(k);
      CHECK(std::abs(ens.mean_populations(kk, j) - rho(j, j).real()) <= 4.0 * ens.stderr_populations(kk, j) + 1e-12);
    }
  }
}
