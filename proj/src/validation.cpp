#include "dephasim/validation.hpp"

#include <cmath>
#include <cstdio>
#include <exception>

#include "dephasim/lindblad.hpp"
#include "dephasim/scenario.hpp"
#include "dephasim/trajectories.hpp"

namespace dephasim {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ValidationCheck two_site_rabi() {
  const double j = 1.0;
  const auto spec = LatticeSpec::homogeneous(2, j);
  const auto grid = uniform_grid(20.0, 400);
  const auto r = evolve(DensityMatrix::site(2, 0), spec, grid);
  double err = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double s = std::sin(j * grid[k]);
    err = std::max(err, std::abs(r.populations(k, 1) - s * s));
  }
  return {"two-site Rabi oscillation", err <= 1e-8, "max error " + sci(err) + " (limit 1e-8)"};
}

ValidationCheck two_site_incoherent() {
  const double j = 1.0, gamma = 30.0;
  const auto spec = LatticeSpec::homogeneous(2, j, gamma);
  const auto grid = uniform_grid(10.0, 200);
  const auto r = evolve(DensityMatrix::site(2, 0), spec, grid);
  const double rate = 2.0 * j * j / gamma;
  double err = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    err = std::max(err, std::abs(r.populations(k, 0) - 0.5 * (1.0 + std::exp(-2.0 * rate * grid[k]))));
  }
  return {"two-site rate-equation limit", err <= 1e-2, "max error " + sci(err) + " (limit 1e-2)"};
}

ValidationCheck builtin_invariants() {
  double trace = 0.0, herm = 0.0, min_eig = 1.0;
  for (const auto& c : builtin_scenarios()) {
    const auto spec = c.lattice();
    const auto grid = uniform_grid(c.to_microseconds(c.t_max), c.n_snapshots - 1);
    for (const auto& s : c.initial_states) {
      EvolveOptions opts;
      opts.store_states = false;
      const auto r = evolve(DensityMatrix::uniform_mixture(spec.size(), s.sites), spec, grid, opts);
      trace = std::max(trace, r.stats.max_trace_error);
      herm = std::max(herm, r.stats.max_hermiticity_error);
      min_eig = std::min(min_eig, r.stats.min_eigenvalue);
    }
  }
  const bool ok = trace <= 1e-9 && herm <= 1e-10 && min_eig >= -1e-8;
  return {"built-in scenario invariants", ok,
          "trace " + sci(trace) + ", hermiticity " + sci(herm) + ", min eigenvalue " + sci(min_eig)};
}

ValidationCheck trajectories_match() {
  const double j = 1.0;
  const auto spec = LatticeSpec::homogeneous(7, j, 3.0 * j);
  const auto grid = uniform_grid(5.0, 25);
  const auto exact = evolve(DensityMatrix::site(7, 3), spec, grid);
  NoiseSpec noise;
  noise.gamma = 3.0 * j;
  noise.n_traj = 2000;
  noise.base_seed = 7;
  const auto ens = run_ensemble(InitialMixture::site(3), spec, noise, grid);
  const double gap = (ens.mean_populations - exact.populations).cwiseAbs().maxCoeff();
  return {"trajectory ensemble vs master equation", gap <= 0.05,
          "sup gap " + sci(gap) + " at 2000 trajectories (limit 0.05)"};
}

template <typename Fn>
ValidationCheck guarded(const char* name, Fn fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {name, false, e.what()};
  }
}

}  // namespace

std::vector<ValidationCheck> run_validation_suite() {
  return {
      guarded("two-site Rabi oscillation", two_site_rabi),
      guarded("two-site rate-equation limit", two_site_incoherent),
      guarded("built-in scenario invariants", builtin_invariants),
      guarded("trajectory ensemble vs master equation", trajectories_match),
  };
}

}  // namespace dephasim
