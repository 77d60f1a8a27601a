#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dephasim/lindblad.hpp"
#include "dephasim/observables.hpp"
#include "dephasim/scenario.hpp"

namespace dephasim {

/// One evolution: a single initial state under a single engine. Times in the
/// series are in the scenario's time unit.
struct EngineRun {
  std::string label;
  Engine engine = Engine::kLindblad;  // never kBoth
  ObservableSeries series;
  std::optional<PowerLawFit> fit;
  std::optional<double> m_at_eval;
  EvolutionStats lindblad_stats;  // lindblad runs only
  std::size_t n_traj = 0;         // trajectory runs only
  double max_norm_drift = 0.0;
  double noise_interval = 0.0;  // scenario time unit
};

struct NamedCrossing {
  Engine engine = Engine::kLindblad;
  std::string reference;  // first initial state
  std::string other;
  CrossingReport report;
};

struct ScenarioReport {
  ScenarioConfig config;
  std::vector<EngineRun> runs;
  std::vector<NamedCrossing> crossings;
  double wall_seconds = 0.0;
};

struct RunOptions {
  std::size_t workers = 0;  // trajectory threads, 0 = hardware concurrency
  bool check_positivity = true;
};

/// Evolves every initial state with the configured engine(s) and derives
/// observables, fits and crossings. Integration failures are rethrown as
/// IntegrationError naming the scenario, state and engine, with the time
/// converted to the scenario unit.
ScenarioReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

struct SweepRow {
  double kappa = 0.0;
  double m_coherent = 0.0;  // NaN when the coherent run is skipped
  double m_dephased = 0.0;
  double ratio = 0.0;
};

/// M at the evaluation time (default t_max) for each kappa, with Gamma = 0
/// and with the configured Gamma. Uses the lindblad engine from the first
/// initial state.
std::vector<SweepRow> sweep_kappa(const ScenarioConfig& base, std::span<const double> kappas,
                                  bool with_and_without_noise);

/// Value of a sampled series at time t by linear interpolation.
double sample_at(std::span<const double> times, std::span<const double> values, double t);

}  // namespace dephasim
