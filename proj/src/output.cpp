#include "dephasim/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dephasim/errors.hpp"
#include "dephasim/svg_plot.hpp"

namespace dephasim {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw SpecificationError("csv: no column named '" + name + "'");
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.at(c));
  return out;
}

CsvTable observables_table(const ObservableSeries& s) {
  CsvTable t;
  const auto sites = static_cast<std::size_t>(s.populations.cols());
  t.header.push_back("t");
  for (std::size_t j = 0; j < sites; ++j) t.header.push_back("n_" + std::to_string(j));
  t.header.insert(t.header.end(), {"W", "M", "D"});
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    std::vector<double> row{s.times[k]};
    for (std::size_t j = 0; j < sites; ++j) row.push_back(s.populations(k, j));
    row.insert(row.end(), {s.w[k], s.m[k], s.d[k]});
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable sweep_table(const std::vector<SweepRow>& rows) {
  CsvTable t;
  t.header = {"kappa", "M_coherent", "M_dephased", "ratio"};
  for (const auto& r : rows) t.rows.push_back({r.kappa, r.m_coherent, r.m_dephased, r.ratio});
  return t;
}

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw DataQualityError("csv line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::string format_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += quote(table.header[c]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += number(row[c]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_record(line, line_no);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw DataQualityError("csv line " + std::to_string(line_no) + ": expected " +
                             std::to_string(t.header.size()) + " fields");
    }
    std::vector<double> row;
    for (const auto& f : fields) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || *end != '\0') {
        throw DataQualityError("csv line " + std::to_string(line_no) + ": '" + f + "' is not a number");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw DataQualityError("csv: empty input");
  return t;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecificationError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string run_stem(const ScenarioReport& report, const EngineRun& run) {
  if (report.runs.size() == 1) return report.config.name;
  const char* engine = run.engine == Engine::kLindblad ? "lindblad" : "traj";
  return report.config.name + "_" + run.label + "_" + engine;
}

json summary_json(const ScenarioReport& report) {
  json j;
  j["scenario"] = report.config.name;
  j["config"] = scenario_to_json(report.config);
  j["time_unit"] = to_string(report.config.time_unit);
  json runs = json::array();
  for (const auto& run : report.runs) {
    json r;
    r["label"] = run.label;
    r["engine"] = to_string(run.engine);
    r["csv"] = run_stem(report, run) + ".csv";
    r["j0"] = run.series.j0;
    r["clamped_entries"] = run.series.clamped_entries;
    r["D_initial"] = run.series.d.front();
    r["D_final"] = run.series.d.back();
    if (run.fit) {
      r["fit"] = {{"window", {report.config.fit_window->start, report.config.fit_window->end}},
                  {"beta", run.fit->beta},
                  {"standard_error", run.fit->standard_error},
                  {"prefactor", run.fit->prefactor},
                  {"points", run.fit->points}};
    }
    if (run.m_at_eval) r["M_eval"] = {{"t", *report.config.m_eval_time}, {"M", *run.m_at_eval}};
    if (run.engine == Engine::kLindblad) {
      const auto& s = run.lindblad_stats;
      r["integrator"] = {{"steps", s.steps},
                         {"rejected_steps", s.rejected_steps},
                         {"internal_step_us", s.internal_step},
                         {"trace_renormalizations", s.trace_renormalizations},
                         {"max_trace_correction", s.max_trace_correction},
                         {"max_trace_error", s.max_trace_error},
                         {"max_hermiticity_error", s.max_hermiticity_error},
                         {"min_eigenvalue", s.min_eigenvalue}};
    } else {
      r["trajectories"] = {{"n_traj", run.n_traj},
                           {"noise_interval", run.noise_interval},
                           {"max_norm_drift", run.max_norm_drift}};
    }
    runs.push_back(r);
  }
  j["runs"] = runs;
  json crossings = json::array();
  for (const auto& c : report.crossings) {
    json x{{"engine", to_string(c.engine)},
           {"reference", c.reference},
           {"other", c.other},
           {"found", c.report.found}};
    if (c.report.found) {
      x["time"] = c.report.time;
      x["sustained"] = c.report.sustained;
    }
    crossings.push_back(x);
  }
  j["crossings"] = crossings;
  return j;
}

void check_writable(const std::vector<fs::path>& targets, bool force) {
  if (force) return;
  for (const auto& p : targets) {
    if (fs::exists(p)) {
      throw SpecificationError("output '" + p.string() + "' already exists (use --force to overwrite)");
    }
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SpecificationError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw SpecificationError("failed writing '" + path.string() + "'");
}

namespace {

struct Plot {
  const char* suffix;
  std::string (*render)(const CsvTable&, const std::string&);
};

constexpr Plot kPlots[] = {
    {"_populations.svg", population_heatmap_svg},
    {"_M.svg", moment_loglog_svg},
    {"_D.svg", distance_svg},
};

}  // namespace

std::vector<fs::path> scenario_targets(const ScenarioReport& report, const fs::path& dir, OutputFormat format) {
  std::vector<fs::path> out;
  for (const auto& run : report.runs) {
    const std::string stem = run_stem(report, run);
    if (format != OutputFormat::kSvg) out.push_back(dir / (stem + ".csv"));
    if (format != OutputFormat::kCsv) {
      for (const auto& p : kPlots) out.push_back(dir / (stem + p.suffix));
    }
  }
  out.push_back(dir / (report.config.name + ".summary.json"));
  return out;
}

std::vector<fs::path> write_scenario(const ScenarioReport& report, const fs::path& dir, OutputFormat format,
                                     bool force) {
  auto targets = scenario_targets(report, dir, format);
  check_writable(targets, force);
  fs::create_directories(dir);
  for (const auto& run : report.runs) {
    const std::string stem = run_stem(report, run);
    // Plots are drawn from the formatted CSV so they show exactly what the file holds.
    const std::string csv = format_csv(observables_table(run.series));
    if (format != OutputFormat::kSvg) write_text(dir / (stem + ".csv"), csv);
    if (format != OutputFormat::kCsv) {
      const CsvTable table = parse_csv(csv);
      const std::string title = report.config.name + " / " + run.label + " / " + to_string(run.engine);
      for (const auto& p : kPlots) write_text(dir / (stem + p.suffix), p.render(table, title));
    }
  }
  write_text(targets.back(), summary_json(report).dump(2) + "\n");
  return targets;
}

fs::path write_sweep(const std::string& name, const std::vector<SweepRow>& rows, const fs::path& dir, bool force) {
  const fs::path path = dir / (name + "_sweep.csv");
  check_writable({path}, force);
  write_text(path, format_csv(sweep_table(rows)));
  return path;
}

}  // namespace dephasim
