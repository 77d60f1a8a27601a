#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dephasim/lattice.hpp"
#include "dephasim/observables.hpp"

namespace dephasim {

enum class TimeUnit { kInverseCoupling, kMicroseconds };
enum class Engine { kLindblad, kTrajectories, kBoth };

const char* to_string(TimeUnit unit);
const char* to_string(Engine engine);
Engine parse_engine(const std::string& text);

struct ExplicitLattice {
  std::vector<double> detunings_mhz;
  std::vector<double> couplings_mhz;
  bool operator==(const ExplicitLattice&) const = default;
};

/// Couplings A + B cos(2 pi alpha j + theta) with A + B equal to the scenario
/// coupling J; kappa = 0 is the homogeneous chain.
struct QuasiperiodicLattice {
  std::size_t sites = 7;
  double kappa = 0.0;
  double alpha = std::numbers::phi - 1.0;
  double theta = 0.0;
  bool operator==(const QuasiperiodicLattice&) const = default;
};

/// Equal-weight mixture of localized excitations (one site = pure state).
struct InitialState {
  std::string label;
  std::vector<std::size_t> sites;
  bool operator==(const InitialState&) const = default;
};

struct NoiseSettings {
  std::optional<double> dt;  ///< in the scenario time unit; unset = largest admissible
  std::size_t n_traj = 1000;
  std::uint64_t base_seed = 20240601;
  bool operator==(const NoiseSettings&) const = default;
};

struct SweepSettings {
  std::vector<double> kappas;
  bool with_and_without_noise = true;
  bool operator==(const SweepSettings&) const = default;
};

/// Declarative description of one numerical experiment. Frequencies are in
/// MHz (f = omega / 2 pi); times are in the chosen unit.
struct ScenarioConfig {
  std::string name;
  double coupling_mhz = 8.3;
  std::optional<ExplicitLattice> explicit_lattice;
  std::optional<QuasiperiodicLattice> quasiperiodic;
  double gamma_over_j = 0.0;
  std::vector<InitialState> initial_states;
  TimeUnit time_unit = TimeUnit::kInverseCoupling;
  double t_max = 10.0;
  std::size_t n_snapshots = 201;
  Engine engine = Engine::kLindblad;
  NoiseSettings noise;
  std::optional<FitWindow> fit_window;
  std::optional<double> m_eval_time;
  std::optional<SweepSettings> sweep;

  bool operator==(const ScenarioConfig&) const;

  /// Throws SpecificationError naming the offending field.
  void validate() const;

  std::size_t sites() const;
  /// J in rad/us.
  double coupling() const;
  double gamma() const { return gamma_over_j * coupling(); }
  /// Scenario time unit to microseconds.
  double to_microseconds(double t) const;
  double from_microseconds(double t_us) const;
  /// Physical lattice in rad/us with uniform dephasing gamma().
  LatticeSpec lattice() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

ScenarioConfig parse_scenario(const std::string& text);
std::string serialize_scenario(const ScenarioConfig& config);
ScenarioConfig load_scenario_file(const std::string& path);

std::vector<ScenarioConfig> builtin_scenarios();
std::optional<ScenarioConfig> find_builtin(const std::string& name);

}  // namespace dephasim
