#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace droptrace {

inline constexpr char kToolVersion[] = "droptrace 0.1.0";

struct StageEntry {
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string status = "ok";  // "ok" | "failed: <reason>"
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string config_hash;
  std::vector<StageEntry> stages;
};

void manifest_to_json_file(const RunManifest& m, const std::string& path);

// Machine-readable analysis outcome; one line per finding in findings.jsonl.
struct AnalysisFinding {
  std::string downloader_family;
  std::string payload_family;
  std::string feature;
  std::string kind;  // "significance" | "changepoint-divergence" | "insufficient-data"
  std::string value_a;
  std::string value_b;
  std::string direction;  // value_a vs value_b: "higher" / "lower"
  double statistic = 0.0;
  double adjusted_p = 1.0;
  double mean_a = 0.0, sem_a = 0.0;
  double mean_b = 0.0, sem_b = 0.0;
  std::string detail;
  std::string window_start, window_end;
  std::map<std::string, std::string> provenance;
};

void write_findings(const std::string& path, const std::vector<AnalysisFinding>& findings);
std::vector<AnalysisFinding> read_findings(const std::string& path);

// Full batch DAG: plan -> simulate -> label -> series -> changepoints ->
// anova, with a manifest and plot-data files in out_dir. Returns 0 on
// success. A stage failure halts the run, keeps partial outputs and marks
// the failing stage in the manifest.
int cmd_pipeline(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override, std::ostream& log);

enum class ReportFormat { Table, Csv, PlotData };

int cmd_report(const std::string& findings_path, ReportFormat format,
               std::ostream& out);

}  // namespace droptrace
