#include "dephasim/experiments.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "dephasim/errors.hpp"
#include "dephasim/trajectories.hpp"

namespace dephasim {

namespace {

std::string describe(const ScenarioConfig& config, const std::string& label, Engine engine) {
  return "scenario '" + config.name + "', state '" + label + "', engine " + to_string(engine);
}

template <typename Fn>
auto with_context(const ScenarioConfig& config, const std::string& label, Engine engine, Fn&& fn) {
  try {
    return fn();
  } catch (const IntegrationError& e) {
    const double t = config.from_microseconds(e.time());
    throw IntegrationError(describe(config, label, engine) + ": " + e.what() + " [t = " + std::to_string(t) +
                               " " + to_string(config.time_unit) + "]",
                           e.time());
  }
}

void finish_run(const ScenarioConfig& config, EngineRun& run) {
  if (config.fit_window) {
    run.fit = fit_spreading_exponent(run.series.times, run.series.m, *config.fit_window);
  }
  if (config.m_eval_time) {
    run.m_at_eval = sample_at(run.series.times, run.series.m, *config.m_eval_time);
  }
}

}  // namespace

double sample_at(std::span<const double> times, std::span<const double> values, double t) {
  if (times.empty() || times.size() != values.size()) throw SpecificationError("sample_at: bad series");
  if (t < times.front() || t > times.back() * (1.0 + 1e-12)) {
    throw SpecificationError("sample_at: time " + std::to_string(t) + " outside the sampled range");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (t <= times[k]) {
      const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
      return values[k - 1] + w * (values[k] - values[k - 1]);
    }
  }
  return values.back();
}

ScenarioReport run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  if (config.m_eval_time && *config.m_eval_time > config.t_max) {
    throw SpecificationError("config field 'm_eval_time': exceeds time.t_max");
  }
  ScenarioReport report;
  report.config = config;

  const LatticeSpec spec = config.lattice();
  const std::size_t n = spec.size();
  const auto grid = uniform_grid(config.t_max, config.n_snapshots - 1);
  std::vector<double> grid_us(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) grid_us[k] = config.to_microseconds(grid[k]);

  const bool lindblad = config.engine != Engine::kTrajectories;
  const bool trajectories = config.engine != Engine::kLindblad;

  for (const auto& state : config.initial_states) {
    if (lindblad) {
      EngineRun run;
      run.label = state.label;
      run.engine = Engine::kLindblad;
      EvolveOptions opts;
      opts.store_states = false;
      opts.check_positivity = options.check_positivity;
      const auto result = with_context(config, state.label, Engine::kLindblad, [&] {
        return evolve(DensityMatrix::uniform_mixture(n, state.sites), spec, grid_us, opts);
      });
      run.series = compute_observables(grid, result.populations);
      run.lindblad_stats = result.stats;
      finish_run(config, run);
      report.runs.push_back(std::move(run));
    }
    if (trajectories) {
      EngineRun run;
      run.label = state.label;
      run.engine = Engine::kTrajectories;
      NoiseSpec noise;
      noise.gamma = config.gamma();
      noise.dt = config.noise.dt ? config.to_microseconds(*config.noise.dt) : 0.0;
      noise.n_traj = config.noise.n_traj;
      noise.base_seed = config.noise.base_seed;
      EnsembleOptions eo;
      eo.workers = options.workers;
      const auto ens = with_context(config, state.label, Engine::kTrajectories, [&] {
        return run_ensemble(InitialMixture::uniform(state.sites), spec, noise, grid_us, eo);
      });
      run.series = compute_observables(grid, ens.mean_populations);
      run.n_traj = ens.n_traj;
      run.max_norm_drift = ens.max_norm_drift;
      run.noise_interval = config.from_microseconds(ens.noise_interval);
      finish_run(config, run);
      report.runs.push_back(std::move(run));
    }
  }

  // Relaxation ordering: the first state against every other one.
  for (Engine engine : {Engine::kLindblad, Engine::kTrajectories}) {
    const EngineRun* reference = nullptr;
    for (const auto& run : report.runs) {
      if (run.engine != engine) continue;
      if (!reference) {
        reference = &run;
        continue;
      }
      NamedCrossing c{engine, reference->label, run.label, {}};
      if (reference->series.d.front() > run.series.d.front()) {
        c.report = detect_mpemba_crossing(reference->series.times, reference->series.d, run.series.d);
      }
      report.crossings.push_back(c);
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<SweepRow> sweep_kappa(const ScenarioConfig& base, std::span<const double> kappas,
                                  bool with_and_without_noise) {
  base.validate();
  if (!base.quasiperiodic) throw SpecificationError("config field 'lattice': sweep needs a quasiperiodic lattice");
  for (double k : kappas) {
    if (!(k > 0.0 && k < 1.0)) throw SpecificationError("config field 'sweep.kappas': values must lie in (0, 1)");
  }
  const double t_eval = base.m_eval_time.value_or(base.t_max);

  auto m_for = [&](double kappa, double gamma_over_j) {
    ScenarioConfig c = base;
    c.quasiperiodic->kappa = kappa;
    c.gamma_over_j = gamma_over_j;
    c.engine = Engine::kLindblad;
    c.initial_states.resize(1);
    c.t_max = t_eval;
    c.m_eval_time = t_eval;
    c.fit_window.reset();
    c.sweep.reset();
    return *run_scenario(c).runs.front().m_at_eval;
  };

  std::vector<SweepRow> rows;
  for (double kappa : kappas) {
    SweepRow row;
    row.kappa = kappa;
    row.m_dephased = m_for(kappa, base.gamma_over_j);
    row.m_coherent = with_and_without_noise ? m_for(kappa, 0.0) : std::numeric_limits<double>::quiet_NaN();
    row.ratio = row.m_coherent / row.m_dephased;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dephasim
