#include "droptrace/plan.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace droptrace {

void validate_catalog(const Catalog& catalog) {
  std::set<std::string> names;
  for (const auto& f : catalog) {
    if (f.name.empty()) throw std::invalid_argument("catalog: empty feature name");
    if (!names.insert(f.name).second)
      throw std::invalid_argument("catalog: duplicate feature " + f.name);
    if (f.values.empty())
      throw std::invalid_argument("catalog: feature " + f.name + " has no values");
    std::set<std::string> vals(f.values.begin(), f.values.end());
    if (vals.size() != f.values.size())
      throw std::invalid_argument("catalog: duplicate value in feature " + f.name);
    if (!vals.count(f.default_value))
      throw std::invalid_argument("catalog: default of " + f.name +
                                  " is not one of its values");
  }
}

Catalog catalog_default() {
  return {
      {"os", {"WindowsXP", "Windows7", "Windows10"}, "Windows7"},
      {"country",
       {"HongKong", "Iran", "US", "Brazil", "Nigeria", "Korea", "Russia",
        "Germany", "Mexico", "Bangladesh"},
       "US"},
      {"keyboard",
       {"English", "Chinese", "Spanish", "Arabic", "Portuguese", "Indonesian",
        "French", "Japanese", "Russian", "German"},
       "English"},
      {"display_language",
       {"English", "Chinese", "Spanish", "Arabic", "Portuguese", "Indonesian",
        "French", "Japanese", "Russian", "German"},
       "English"},
      {"browser_profile",
       {"Business", "Games", "Health", "KidsAndTeens", "Men", "News",
        "SocialNetworks", "Sports", "Women"},
       "SocialNetworks"},
  };
}

Catalog catalog_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open catalog file: " + path);
  nlohmann::json j;
  in >> j;
  Catalog catalog;
  for (const auto& jf : j.at("features")) {
    Feature f;
    f.name = jf.at("name").get<std::string>();
    f.values = jf.at("values").get<std::vector<std::string>>();
    f.default_value = jf.at("default").get<std::string>();
    catalog.push_back(std::move(f));
  }
  validate_catalog(catalog);
  return catalog;
}

void catalog_to_json_file(const Catalog& catalog, const std::string& path) {
  nlohmann::json j;
  for (const auto& f : catalog)
    j["features"].push_back(
        {{"name", f.name}, {"values", f.values}, {"default", f.default_value}});
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

MachineProfile default_profile(const Catalog& catalog) {
  MachineProfile p;
  for (const auto& f : catalog) p.assignments[f.name] = f.default_value;
  return p;
}

std::vector<MachineProfile> ofat_matrix(const Catalog& catalog) {
  validate_catalog(catalog);
  const MachineProfile base = default_profile(catalog);
  std::vector<MachineProfile> out;
  for (const auto& f : catalog) {
    for (const auto& v : f.values) {
      MachineProfile p = base;
      p.assignments[f.name] = v;
      out.push_back(std::move(p));
    }
  }
  return out;
}

ExperimentPlan make_plan(const Catalog& catalog, int families, int samples_per_day,
                         int run_minutes, int day_minutes) {
  ExperimentPlan plan;
  plan.downloader_families = families;
  plan.samples_per_family_per_day = samples_per_day;
  plan.run_minutes = run_minutes;
  plan.day_minutes = day_minutes;
  plan.profiles = ofat_matrix(catalog);
  plan.feature_variations = int(plan.profiles.size());
  return plan;
}

int required_vms(const ExperimentPlan& plan) {
  const std::int64_t d = plan.downloader_families, s = plan.samples_per_family_per_day,
                     k = plan.feature_variations, t = plan.run_minutes,
                     p = plan.day_minutes;
  if (d <= 0 || s <= 0 || k <= 0 || t <= 0 || p <= 0)
    throw std::domain_error("required_vms: all plan counts must be positive");
  if (p < t) throw std::domain_error("required_vms: day shorter than one run");
  const std::int64_t num = d * s * k * t;
  return int((num + p - 1) / p);
}

}  // namespace droptrace
