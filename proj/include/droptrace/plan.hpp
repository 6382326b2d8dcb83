#pragma once

#include <map>
#include <string>
#include <vector>

namespace droptrace {

// One modifiable characteristic of a victim machine, with the set of values
// the experiment cycles through and the baseline value used when another
// feature is the one under test.
struct Feature {
  std::string name;
  std::vector<std::string> values;
  std::string default_value;
};

using Catalog = std::vector<Feature>;

// Full assignment of every catalog feature to one of its values.
struct MachineProfile {
  std::map<std::string, std::string> assignments;

  bool operator==(const MachineProfile&) const = default;

  const std::string& at(const std::string& feature) const {
    return assignments.at(feature);
  }
};

struct ExperimentPlan {
  int downloader_families = 0;       // d
  int samples_per_family_per_day = 0;  // s
  int feature_variations = 0;        // k
  int run_minutes = 0;               // t
  int day_minutes = 1440;            // p
  std::vector<MachineProfile> profiles;
};

// Throws std::invalid_argument on duplicate values, empty value lists,
// defaults outside the value set, or duplicate feature names.
void validate_catalog(const Catalog& catalog);

// The shipped feature catalog: OS, country, keyboard layout, display
// language, browser profile. 42 tested values total.
Catalog catalog_default();

Catalog catalog_from_json_file(const std::string& path);
void catalog_to_json_file(const Catalog& catalog, const std::string& path);

// Profile with every feature at its default value.
MachineProfile default_profile(const Catalog& catalog);

// One-factor-at-a-time matrix: one profile per (feature, value) pair, in
// catalog order then value order. The profile that re-selects a feature's
// own default is included so every value gets a complete series.
std::vector<MachineProfile> ofat_matrix(const Catalog& catalog);

ExperimentPlan make_plan(const Catalog& catalog, int families, int samples_per_day,
                         int run_minutes, int day_minutes = 1440);

// Ceiling of d*s*k*t/p. Throws std::domain_error on non-positive input.
int required_vms(const ExperimentPlan& plan);

}  // namespace droptrace
