#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dephasim/errors.hpp"
#include "dephasim/experiments.hpp"
#include "dephasim/output.hpp"
#include "dephasim/scenario.hpp"
#include "dephasim/svg_plot.hpp"
#include "dephasim/validation.hpp"

namespace fs = std::filesystem;
using namespace dephasim;

namespace {

constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;

ScenarioConfig resolve(const std::string& name_or_path) {
  if (auto builtin = find_builtin(name_or_path)) return *builtin;
  if (!fs::exists(name_or_path)) {
    throw SpecificationError("'" + name_or_path + "' is neither a built-in scenario nor an existing config file");
  }
  return load_scenario_file(name_or_path);
}

OutputFormat parse_format(const std::string& s) {
  if (s == "svg") return OutputFormat::kSvg;
  if (s == "both") return OutputFormat::kBoth;
  return OutputFormat::kCsv;
}

struct Common {
  std::string out;
  bool force = false;
  bool verbose = false;
};

void add_output_flags(CLI::App* cmd, Common& common) {
  cmd->add_option("--out", common.out, "Output directory (default: $DEPHASIM_OUT, else ./results)")
      ->envname("DEPHASIM_OUT");
  cmd->add_flag("--force", common.force, "Overwrite existing output files");
}

int run_command(const std::string& target, const Common& common, std::optional<std::uint64_t> seed,
                std::optional<std::string> engine, std::optional<std::size_t> ntraj, const std::string& format) {
  ScenarioConfig config = resolve(target);
  if (seed) config.noise.base_seed = *seed;
  if (engine) config.engine = parse_engine(*engine);
  if (ntraj) config.noise.n_traj = *ntraj;
  config.validate();

  // Probe the targets up front so an existing file fails before the run.
  ScenarioReport probe;
  probe.config = config;
  for (const auto& s : config.initial_states) {
    for (Engine e : {Engine::kLindblad, Engine::kTrajectories}) {
      if (config.engine != Engine::kBoth && config.engine != e) continue;
      EngineRun run;
      run.label = s.label;
      run.engine = e;
      probe.runs.push_back(run);
    }
  }
  check_writable(scenario_targets(probe, common.out, parse_format(format)), common.force);

  const ScenarioReport report = run_scenario(config);
  for (const auto& path : write_scenario(report, common.out, parse_format(format), common.force)) {
    std::printf("wrote %s\n", path.string().c_str());
  }
  for (const auto& run : report.runs) {
    std::printf("%s [%s]", run.label.c_str(), to_string(run.engine));
    if (run.fit) std::printf(" beta = %.4f +/- %.4f", run.fit->beta, run.fit->standard_error);
    if (run.m_at_eval) std::printf(" M(%g) = %.6g", *config.m_eval_time, *run.m_at_eval);
    std::printf(" D(end) = %.3g\n", run.series.d.back());
  }
  for (const auto& c : report.crossings) {
    std::printf("crossing %s below %s [%s]: ", c.reference.c_str(), c.other.c_str(), to_string(c.engine));
    if (c.report.found) {
      std::printf("t = %.4g %s%s\n", c.report.time, to_string(config.time_unit),
                  c.report.sustained ? " (sustained)" : " (not sustained)");
    } else {
      std::printf("none\n");
    }
  }
  if (common.verbose) std::fprintf(stderr, "wall clock %.2f s\n", report.wall_seconds);
  return 0;
}

int sweep_command(const std::string& target, const Common& common, std::vector<double> kappas, bool coherent_only_off) {
  ScenarioConfig config = resolve(target);
  bool both = true;
  if (config.sweep) {
    if (kappas.empty()) kappas = config.sweep->kappas;
    both = config.sweep->with_and_without_noise;
  }
  if (coherent_only_off) both = false;
  if (kappas.empty()) throw SpecificationError("config field 'sweep.kappas': no kappa values given");
  check_writable({fs::path(common.out) / (config.name + "_sweep.csv")}, common.force);
  const auto rows = sweep_kappa(config, kappas, both);
  const auto path = write_sweep(config.name, rows, common.out, common.force);
  std::printf("%8s %12s %12s %8s\n", "kappa", "M_coherent", "M_dephased", "ratio");
  for (const auto& r : rows) std::printf("%8.3f %12.6g %12.6g %8.3f\n", r.kappa, r.m_coherent, r.m_dephased, r.ratio);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int validate_command() {
  bool all = true;
  for (const auto& c : run_validation_suite()) {
    std::printf("%-4s %-40s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    all = all && c.passed;
  }
  return all ? 0 : kNumericalError;
}

int plot_command(const std::string& csv, const Common& common) {
  const CsvTable table = read_csv(csv);
  const fs::path dir = common.out.empty() ? fs::path(csv).parent_path() : fs::path(common.out);
  const std::string stem = fs::path(csv).stem().string();
  const std::vector<std::pair<fs::path, std::string>> plots = {
      {dir / (stem + "_populations.svg"), population_heatmap_svg(table, stem)},
      {dir / (stem + "_M.svg"), moment_loglog_svg(table, stem)},
      {dir / (stem + "_D.svg"), distance_svg(table, stem)},
  };
  std::vector<fs::path> targets;
  for (const auto& p : plots) targets.push_back(p.first);
  check_writable(targets, common.force);
  for (const auto& [path, svg] : plots) {
    write_text(path, svg);
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

int list_command() {
  for (const auto& c : builtin_scenarios()) {
    std::printf("%-26s L=%-3zu Gamma/J=%-4g t_max=%g %s, %zu state(s)\n", c.name.c_str(), c.sites(), c.gamma_over_j,
                c.t_max, to_string(c.time_unit), c.initial_states.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dephasing-assisted transport in single-excitation qubit chains"};
  app.require_subcommand(1, 1);
  Common common;
  app.add_flag("-v,--verbose", common.verbose, "Print timing to stderr");

  std::string target;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> engine;
  std::optional<std::size_t> ntraj;
  std::string format = "csv";
  auto* run = app.add_subcommand("run", "Run a built-in scenario or a JSON config file");
  run->add_option("scenario", target, "Built-in scenario name or config path")->required();
  add_output_flags(run, common);
  run->add_option("--seed", seed, "Override noise.base_seed");
  run->add_option("--engine", engine, "Override the engine")->check(CLI::IsMember({"lindblad", "traj", "both"}));
  run->add_option("--ntraj", ntraj, "Override noise.n_traj")->check(CLI::PositiveNumber);
  run->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "svg", "both"}));

  std::vector<double> kappas;
  bool dephased_only = false;
  auto* sweep = app.add_subcommand("sweep", "M at the evaluation time against kappa, with and without dephasing");
  sweep->add_option("scenario", target, "Built-in scenario name or config path")->required();
  add_output_flags(sweep, common);
  sweep->add_option("--kappas", kappas, "Kappa values in (0, 1), overriding the config")->delimiter(',');
  sweep->add_flag("--dephased-only", dephased_only, "Skip the coherent runs");

  auto* validate = app.add_subcommand("validate", "Run the invariant and oracle suite");

  std::string csv;
  auto* plot = app.add_subcommand("plot", "Draw SVG plots from an output CSV");
  plot->add_option("csv", csv, "CSV written by 'run'")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", common.out, "Output directory (default: next to the CSV)");
  plot->add_flag("--force", common.force, "Overwrite existing output files");

  auto* list = app.add_subcommand("list-scenarios", "List the built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  if (common.out.empty() && !plot->parsed()) common.out = "results";

  try {
    if (run->parsed()) return run_command(target, common, seed, engine, ntraj, format);
    if (sweep->parsed()) return sweep_command(target, common, kappas, dephased_only);
    if (validate->parsed()) return validate_command();
    if (plot->parsed()) return plot_command(csv, common);
    if (list->parsed()) return list_command();
  } catch (const SpecificationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IntegrationError& e) {
    std::cerr << "integration failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const DataQualityError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const FitDomainError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kConfigError;
  }
  return 0;
}
