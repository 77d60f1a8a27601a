#include "dephasim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "dephasim/errors.hpp"

namespace dephasim {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw SpecificationError("config field '" + field + "': " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) field_error(where.empty() ? "<root>" : where, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) field_error(where.empty() ? key : where + "." + key, "unknown field");
  }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) field_error(path, "missing");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    field_error(path, "has the wrong type");
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  return get<T>(obj, key, path);
}

std::size_t get_count(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) field_error(path, "missing");
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) field_error(path, "must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<std::size_t> get_sites(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "must be an array of site indices");
  std::vector<std::size_t> out;
  for (const auto& x : v) {
    if (!x.is_number_integer() || x.get<long long>() < 0) field_error(path, "site indices must be nonnegative integers");
    out.push_back(x.get<std::size_t>());
  }
  return out;
}

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

const char* to_string(TimeUnit unit) {
  return unit == TimeUnit::kMicroseconds ? "us" : "1/J";
}

const char* to_string(Engine engine) {
  switch (engine) {
    case Engine::kLindblad: return "lindblad";
    case Engine::kTrajectories: return "trajectories";
    case Engine::kBoth: return "both";
  }
  return "lindblad";
}

Engine parse_engine(const std::string& text) {
  if (text == "lindblad") return Engine::kLindblad;
  if (text == "trajectories" || text == "traj") return Engine::kTrajectories;
  if (text == "both") return Engine::kBoth;
  field_error("engine", "expected lindblad, trajectories (traj) or both, got '" + text + "'");
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  auto window_eq = [](const std::optional<FitWindow>& a, const std::optional<FitWindow>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (same_double(a->start, b->start) && same_double(a->end, b->end));
  };
  return name == o.name && same_double(coupling_mhz, o.coupling_mhz) && explicit_lattice == o.explicit_lattice &&
         quasiperiodic == o.quasiperiodic && same_double(gamma_over_j, o.gamma_over_j) &&
         initial_states == o.initial_states && time_unit == o.time_unit && same_double(t_max, o.t_max) &&
         n_snapshots == o.n_snapshots && engine == o.engine && noise == o.noise &&
         window_eq(fit_window, o.fit_window) && m_eval_time == o.m_eval_time && sweep == o.sweep;
}

std::size_t ScenarioConfig::sites() const {
  if (quasiperiodic) return quasiperiodic->sites;
  if (explicit_lattice) return explicit_lattice->detunings_mhz.size();
  return 0;
}

double ScenarioConfig::coupling() const { return 2.0 * std::numbers::pi * coupling_mhz; }

double ScenarioConfig::to_microseconds(double t) const {
  return time_unit == TimeUnit::kInverseCoupling ? t / coupling() : t;
}

double ScenarioConfig::from_microseconds(double t_us) const {
  return time_unit == TimeUnit::kInverseCoupling ? t_us * coupling() : t_us;
}

void ScenarioConfig::validate() const {
  if (name.empty()) field_error("name", "must not be empty");
  if (!(coupling_mhz > 0.0) || !std::isfinite(coupling_mhz)) field_error("coupling_mhz", "must be positive");
  if (explicit_lattice.has_value() == quasiperiodic.has_value()) {
    field_error("lattice", "exactly one of 'explicit' or 'quasiperiodic' is required");
  }
  if (quasiperiodic) {
    if (quasiperiodic->sites < 2) field_error("lattice.quasiperiodic.sites", "must be at least 2");
    if (!(quasiperiodic->kappa >= 0.0)) field_error("lattice.quasiperiodic.kappa", "must be nonnegative");
  }
  if (explicit_lattice) {
    const auto n = explicit_lattice->detunings_mhz.size();
    if (n < 2) field_error("lattice.explicit.detunings_mhz", "needs at least 2 sites");
    if (explicit_lattice->couplings_mhz.size() != n - 1) {
      field_error("lattice.explicit.couplings_mhz", "must have one entry fewer than detunings_mhz");
    }
  }
  if (!(gamma_over_j >= 0.0)) field_error("gamma_over_J", "must be nonnegative");
  if (initial_states.empty()) field_error("initial_states", "at least one initial state is required");
  for (std::size_t i = 0; i < initial_states.size(); ++i) {
    const auto& s = initial_states[i];
    const std::string path = "initial_states[" + std::to_string(i) + "]";
    if (s.label.empty()) field_error(path + ".label", "must not be empty");
    if (s.sites.empty()) field_error(path + ".sites", "must list at least one site");
    std::set<std::size_t> seen;
    for (std::size_t k : s.sites) {
      if (k >= sites()) field_error(path + ".sites", "site " + std::to_string(k) + " is out of range");
      if (!seen.insert(k).second) field_error(path + ".sites", "site " + std::to_string(k) + " is repeated");
    }
    for (std::size_t q = 0; q < i; ++q) {
      if (initial_states[q].label == s.label) field_error(path + ".label", "duplicate label '" + s.label + "'");
    }
  }
  if (!(t_max > 0.0) || !std::isfinite(t_max)) field_error("time.t_max", "must be positive");
  if (n_snapshots < 2) field_error("time.n_snapshots", "must be at least 2");
  if (noise.dt && !(*noise.dt > 0.0)) field_error("noise.dt", "must be positive");
  if (noise.n_traj < 1) field_error("noise.n_traj", "must be at least 1");
  if (fit_window && !(fit_window->end > fit_window->start && fit_window->start >= 0.0)) {
    field_error("fit_window", "must be [start, end] with 0 <= start < end");
  }
  if (m_eval_time && !(*m_eval_time > 0.0)) field_error("m_eval_time", "must be positive");
  if (sweep) {
    if (!quasiperiodic) field_error("sweep", "requires a quasiperiodic lattice");
    if (sweep->kappas.empty()) field_error("sweep.kappas", "must not be empty");
    for (double k : sweep->kappas) {
      if (!(k > 0.0 && k < 1.0)) field_error("sweep.kappas", "values must lie in (0, 1)");
    }
  }
}

LatticeSpec ScenarioConfig::lattice() const {
  validate();
  const double mhz = 2.0 * std::numbers::pi;
  LatticeSpec spec;
  const std::size_t n = sites();
  spec.dephasing_rates.assign(n, gamma());
  if (explicit_lattice) {
    for (double d : explicit_lattice->detunings_mhz) spec.detunings.push_back(mhz * d);
    for (double g : explicit_lattice->couplings_mhz) spec.couplings.push_back(mhz * g);
  } else {
    QuasiperiodicSpec q = QuasiperiodicSpec::from_total(coupling(), quasiperiodic->kappa, n);
    q.alpha = quasiperiodic->alpha;
    q.theta = quasiperiodic->theta;
    spec.detunings.assign(n, 0.0);
    spec.couplings = quasiperiodic_couplings(q);
  }
  spec.validate();
  return spec;
}

ScenarioConfig scenario_from_json(const json& j) {
  reject_unknown(j, "", {"name", "coupling_mhz", "lattice", "gamma_over_J", "initial_states", "time", "engine",
                         "noise", "fit_window", "m_eval_time", "sweep"});
  ScenarioConfig c;
  c.name = get<std::string>(j, "name", "name");
  c.coupling_mhz = get_or<double>(j, "coupling_mhz", "coupling_mhz", c.coupling_mhz);

  if (!j.contains("lattice")) field_error("lattice", "missing");
  const json& lat = j.at("lattice");
  reject_unknown(lat, "lattice", {"explicit", "quasiperiodic"});
  if (lat.contains("explicit")) {
    const json& e = lat.at("explicit");
    reject_unknown(e, "lattice.explicit", {"detunings_mhz", "couplings_mhz"});
    ExplicitLattice x;
    x.detunings_mhz = get<std::vector<double>>(e, "detunings_mhz", "lattice.explicit.detunings_mhz");
    x.couplings_mhz = get<std::vector<double>>(e, "couplings_mhz", "lattice.explicit.couplings_mhz");
    c.explicit_lattice = x;
  }
  if (lat.contains("quasiperiodic")) {
    const json& q = lat.at("quasiperiodic");
    reject_unknown(q, "lattice.quasiperiodic", {"sites", "kappa", "alpha", "theta"});
    QuasiperiodicLattice x;
    x.sites = get_count(q, "sites", "lattice.quasiperiodic.sites");
    x.kappa = get_or<double>(q, "kappa", "lattice.quasiperiodic.kappa", 0.0);
    x.alpha = get_or<double>(q, "alpha", "lattice.quasiperiodic.alpha", x.alpha);
    x.theta = get_or<double>(q, "theta", "lattice.quasiperiodic.theta", 0.0);
    c.quasiperiodic = x;
  }

  c.gamma_over_j = get_or<double>(j, "gamma_over_J", "gamma_over_J", 0.0);

  if (!j.contains("initial_states")) field_error("initial_states", "missing");
  const json& states = j.at("initial_states");
  if (!states.is_array()) field_error("initial_states", "must be an array");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string path = "initial_states[" + std::to_string(i) + "]";
    const json& s = states[i];
    reject_unknown(s, path, {"label", "site", "sites"});
    InitialState st;
    st.label = get<std::string>(s, "label", path + ".label");
    if (s.contains("site") == s.contains("sites")) field_error(path, "give exactly one of 'site' or 'sites'");
    if (s.contains("site")) {
      st.sites = get_sites(json::array({s.at("site")}), path + ".site");
    } else {
      st.sites = get_sites(s.at("sites"), path + ".sites");
    }
    c.initial_states.push_back(st);
  }

  if (!j.contains("time")) field_error("time", "missing");
  const json& t = j.at("time");
  reject_unknown(t, "time", {"unit", "t_max", "n_snapshots"});
  const std::string unit = get_or<std::string>(t, "unit", "time.unit", "1/J");
  if (unit == "1/J") {
    c.time_unit = TimeUnit::kInverseCoupling;
  } else if (unit == "us") {
    c.time_unit = TimeUnit::kMicroseconds;
  } else {
    field_error("time.unit", "expected '1/J' or 'us', got '" + unit + "'");
  }
  c.t_max = get<double>(t, "t_max", "time.t_max");
  if (t.contains("n_snapshots")) c.n_snapshots = get_count(t, "n_snapshots", "time.n_snapshots");

  if (j.contains("engine")) c.engine = parse_engine(get<std::string>(j, "engine", "engine"));

  if (j.contains("noise")) {
    const json& n = j.at("noise");
    reject_unknown(n, "noise", {"dt", "n_traj", "base_seed"});
    if (n.contains("dt") && !n.at("dt").is_null()) c.noise.dt = get<double>(n, "dt", "noise.dt");
    if (n.contains("n_traj")) c.noise.n_traj = get_count(n, "n_traj", "noise.n_traj");
    if (n.contains("base_seed")) {
      if (!n.at("base_seed").is_number_unsigned() && !n.at("base_seed").is_number_integer()) {
        field_error("noise.base_seed", "must be an integer");
      }
      c.noise.base_seed = n.at("base_seed").get<std::uint64_t>();
    }
  }

  if (j.contains("fit_window") && !j.at("fit_window").is_null()) {
    const auto w = get<std::vector<double>>(j, "fit_window", "fit_window");
    if (w.size() != 2) field_error("fit_window", "must be [start, end]");
    c.fit_window = FitWindow{w[0], w[1]};
  }
  if (j.contains("m_eval_time") && !j.at("m_eval_time").is_null()) {
    c.m_eval_time = get<double>(j, "m_eval_time", "m_eval_time");
  }
  if (j.contains("sweep") && !j.at("sweep").is_null()) {
    const json& s = j.at("sweep");
    reject_unknown(s, "sweep", {"kappas", "with_and_without_noise"});
    SweepSettings sw;
    sw.kappas = get<std::vector<double>>(s, "kappas", "sweep.kappas");
    sw.with_and_without_noise = get_or<bool>(s, "with_and_without_noise", "sweep.with_and_without_noise", true);
    c.sweep = sw;
  }

  c.validate();
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["coupling_mhz"] = c.coupling_mhz;
  json lat = json::object();
  if (c.explicit_lattice) {
    lat["explicit"] = {{"detunings_mhz", c.explicit_lattice->detunings_mhz},
                       {"couplings_mhz", c.explicit_lattice->couplings_mhz}};
  }
  if (c.quasiperiodic) {
    lat["quasiperiodic"] = {{"sites", c.quasiperiodic->sites},
                            {"kappa", c.quasiperiodic->kappa},
                            {"alpha", c.quasiperiodic->alpha},
                            {"theta", c.quasiperiodic->theta}};
  }
  j["lattice"] = lat;
  j["gamma_over_J"] = c.gamma_over_j;
  json states = json::array();
  for (const auto& s : c.initial_states) states.push_back({{"label", s.label}, {"sites", s.sites}});
  j["initial_states"] = states;
  j["time"] = {{"unit", to_string(c.time_unit)}, {"t_max", c.t_max}, {"n_snapshots", c.n_snapshots}};
  j["engine"] = to_string(c.engine);
  j["noise"] = {{"dt", c.noise.dt ? json(*c.noise.dt) : json(nullptr)},
                {"n_traj", c.noise.n_traj},
                {"base_seed", c.noise.base_seed}};
  if (c.fit_window) j["fit_window"] = {c.fit_window->start, c.fit_window->end};
  if (c.m_eval_time) j["m_eval_time"] = *c.m_eval_time;
  if (c.sweep) {
    j["sweep"] = {{"kappas", c.sweep->kappas}, {"with_and_without_noise", c.sweep->with_and_without_noise}};
  }
  return j;
}

ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecificationError(std::string("config is not valid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

std::string serialize_scenario(const ScenarioConfig& config) { return scenario_to_json(config).dump(2) + "\n"; }

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecificationError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace {

ScenarioConfig chain(std::string name, std::size_t sites, double kappa, double gamma_over_j, double t_max) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.quasiperiodic = QuasiperiodicLattice{};
  c.quasiperiodic->sites = sites;
  c.quasiperiodic->kappa = kappa;
  c.gamma_over_j = gamma_over_j;
  c.t_max = t_max;
  c.initial_states = {{"center", {sites / 2}}};
  return c;
}

}  // namespace

std::vector<ScenarioConfig> builtin_scenarios() {
  std::vector<ScenarioConfig> out;

  // Seven-qubit transport: coherent and strongly dephased.
  auto ballistic = chain("fig2_ballistic", 7, 0.0, 0.0, 10.0);
  ballistic.fit_window = FitWindow{0.2, 1.2};
  out.push_back(ballistic);
  auto diffusive = chain("fig2_diffusive", 7, 0.0, 30.0, 20.0);
  diffusive.fit_window = FitWindow{2.0, 20.0};
  out.push_back(diffusive);

  // Longer chains push the boundary reflections past the fit windows.
  auto ballistic41 = chain("transport_l41_ballistic", 41, 0.0, 0.0, 10.0);
  ballistic41.fit_window = FitWindow{1.0, 8.0};
  out.push_back(ballistic41);
  auto diffusive41 = chain("transport_l41_diffusive", 41, 0.0, 30.0, 30.0);
  diffusive41.fit_window = FitWindow{5.0, 30.0};
  out.push_back(diffusive41);

  // Quasiperiodic chains at kappa = 0.3 and 0.7.
  for (double kappa : {0.3, 0.7}) {
    const std::string tag = kappa == 0.3 ? "k03" : "k07";
    for (bool noisy : {false, true}) {
      auto c = chain("fig3_" + tag + (noisy ? "_noise" : ""), 7, kappa, noisy ? 30.0 : 0.0, 10.0);
      c.m_eval_time = 10.0;
      out.push_back(c);
    }
  }

  auto sweep = chain("fig3b_sweep", 89, 0.5, 30.0, 20.0);
  sweep.m_eval_time = 20.0;
  sweep.sweep = SweepSettings{{0.1, 0.3, 0.5, 0.7, 0.9}, true};
  out.push_back(sweep);

  auto mpemba = chain("fig4_mpemba", 7, 0.0, 3.0, 50.0);
  mpemba.n_snapshots = 501;
  // Centred sites j map to internal index j + 3.
  mpemba.initial_states = {{"rho1", {3}}, {"rho2", {5, 6}}, {"rho3", {4, 5, 6}}, {"rho4", {3, 4, 5, 6}}};
  out.push_back(mpemba);
  return out;
}

std::optional<ScenarioConfig> find_builtin(const std::string& name) {
  for (auto& c : builtin_scenarios()) {
    if (c.name == name) return c;
  }
  return std::nullopt;
}

}  // namespace dephasim
