#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dephasim/experiments.hpp"

namespace dephasim {

/// Rectangular numeric table with named columns.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

/// Columns t, n_0..n_{L-1}, W, M, D.
CsvTable observables_table(const ObservableSeries& series);
CsvTable sweep_table(const std::vector<SweepRow>& rows);

/// %.12g numbers, RFC 4180 quoting for text fields, CRLF-free.
std::string format_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

/// "<name>" for a single-run scenario, else "<name>_<label>_<engine>".
std::string run_stem(const ScenarioReport& report, const EngineRun& run);

/// Fits, crossings, run diagnostics and the config echo. Excludes wall-clock
/// time so that the file is reproducible.
nlohmann::json summary_json(const ScenarioReport& report);

enum class OutputFormat { kCsv, kSvg, kBoth };

/// Fails with SpecificationError, before writing anything, if a target exists
/// and force is false.
void check_writable(const std::vector<std::filesystem::path>& targets, bool force);

std::vector<std::filesystem::path> scenario_targets(const ScenarioReport& report,
                                                    const std::filesystem::path& dir, OutputFormat format);
/// Writes the per-run CSVs and/or plots plus <name>.summary.json; returns the
/// paths written.
std::vector<std::filesystem::path> write_scenario(const ScenarioReport& report, const std::filesystem::path& dir,
                                                  OutputFormat format, bool force);

std::filesystem::path write_sweep(const std::string& name, const std::vector<SweepRow>& rows,
                                  const std::filesystem::path& dir, bool force);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dephasim
