#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "droptrace/date.hpp"
#include "droptrace/plan.hpp"
#include "droptrace/records.hpp"

namespace droptrace {

// A planted targeting behavior: while active, runs whose profile assigns
// `matched_value` to `feature` have their detonation rate multiplied by
// `rate_multiplier`, and the payload mix weight of `payload_family` is
// scaled by the same factor.
struct TargetingRule {
  std::string feature;
  std::string matched_value;
  std::string payload_family;
  double rate_multiplier = 1.0;
  DateInterval active;
};

struct UptimeSpan {
  DateInterval interval;
  double availability = 1.0;  // P(C&C reachable) per run
};

struct DownloaderSpec {
  std::string name;
  double base_detonation_rate = 0.0;
  std::vector<UptimeSpan> cnc_uptime;  // gaps default to availability 1.0
  std::vector<TargetingRule> targeting_rules;
  std::map<std::string, double> payload_mix;  // family -> weight
  int daily_fresh_samples = 10;
  // Fraction of the daily sample budget actually delivered by the feed.
  // Drawn from a stream independent of the scenario seed, so the run
  // structure (record counts) is identical across seeds.
  double sample_availability = 1.0;

  double cnc_availability(const Date& d) const;
};

// Antivirus engine agreement knobs.
struct AvModel {
  double malicious_detect_rate = 0.5;  // per-engine P(detect) on real payloads
  double generic_label_rate = 0.25;    // P(detection carries a generic label)
  double benign_flag_rate = 0.02;      // per-engine FP rate on text/html drops
};

struct Scenario {
  std::vector<DownloaderSpec> downloader_families;
  DateInterval date_range;
  std::uint64_t seed = 0;
  int av_engine_count = 60;
  AvModel av;
  double failed_payload_rate = 0.3;   // failed runs still drop text/html
  double double_payload_rate = 0.0136;
  double triple_payload_rate = 0.0086;
};

struct PlantedTarget {
  std::string feature;
  std::string value;
  std::string payload_family;
  double multiplier = 1.0;
  DateInterval interval;
};

struct PlantedUptime {
  std::string downloader_family;
  DateInterval interval;
  double availability = 1.0;
};

struct TargetingTruth {
  std::vector<PlantedTarget> targets;   // sorted by interval start
  std::vector<PlantedUptime> uptimes;
};

struct SimOutput {
  std::vector<ExecutionRecord> records;
  std::vector<AvReport> reports;
  TargetingTruth truth;
};

void validate_scenario(const Scenario& s);

// Deterministic given (scenario, plan); per-(day, family) sub-seeds make
// day-level parallel generation possible without changing the output.
SimOutput simulate(const Scenario& scenario, const ExperimentPlan& plan);

TargetingTruth planted_truth(const Scenario& scenario);

Scenario scenario_from_json_file(const std::string& path);
void truth_to_json_file(const TargetingTruth& truth, const std::string& path);

}  // namespace droptrace
