#include "droptrace/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace droptrace {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t hash_str(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Sub-seed for one (day, family) cell.
std::mt19937_64 cell_rng(std::uint64_t seed, const Date& day, const std::string& fam) {
  return std::mt19937_64(
      splitmix64(seed ^ splitmix64(std::uint64_t(day.ordinal()) ^ hash_str(fam))));
}

std::string hex_id(std::mt19937_64& rng) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)rng());
  return buf;
}

// Samples delivered by the feed on a given day. Keyed by a fixed constant,
// not the scenario seed: record counts per (day, family) are structural.
int samples_available(const DownloaderSpec& spec, const Date& day, int budget) {
  const int cap = std::min(budget, spec.daily_fresh_samples);
  if (spec.sample_availability >= 1.0) return cap;
  std::mt19937_64 rng(
      splitmix64(0x5eedfeedull ^ splitmix64(std::uint64_t(day.ordinal()) ^ hash_str(spec.name))));
  std::binomial_distribution<int> avail(cap, spec.sample_availability);
  return avail(rng);
}

const char* kGenericTemplates[] = {
    "Trojan.Generic.%u", "Gen:Variant.Strictor.%u", "HEUR:Trojan.Script.%u",
    "Trojan.Agent.%u", "W32/Heuristic.%u"};

std::string generic_label(std::mt19937_64& rng) {
  char buf[64];
  const auto* tpl = kGenericTemplates[rng() % std::size(kGenericTemplates)];
  std::snprintf(buf, sizeof buf, tpl, unsigned(rng() % 90000 + 10000));
  return buf;
}

std::string family_label(const std::string& fam, std::mt19937_64& rng) {
  char buf[96];
  switch (rng() % 3) {
    case 0:
      std::snprintf(buf, sizeof buf, "Win32/TrojanDownloader.%s.%c%c", fam.c_str(),
                    char('A' + rng() % 26), char('A' + rng() % 26));
      break;
    case 1:
      std::snprintf(buf, sizeof buf, "Trojan.%s.%u", fam.c_str(),
                    unsigned(rng() % 9000 + 1000));
      break;
    default:
      std::snprintf(buf, sizeof buf, "W32/%s.%c", fam.c_str(), char('A' + rng() % 26));
      break;
  }
  return buf;
}

AvReport scan_payload(const std::string& payload_id, const std::string& family,
                      bool executable, const Scenario& sc, std::mt19937_64& rng) {
  AvReport rep;
  rep.payload_id = payload_id;
  rep.scanned_at = sc.date_range.end + 30;  // rescanned after the campaign
  rep.engine_count = sc.av_engine_count;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int e = 0; e < sc.av_engine_count; ++e) {
    const double detect_p =
        executable ? sc.av.malicious_detect_rate : sc.av.benign_flag_rate;
    if (u(rng) >= detect_p) continue;
    char eng[8];
    std::snprintf(eng, sizeof eng, "av%02d", e);
    const bool generic = !executable || u(rng) < sc.av.generic_label_rate;
    rep.detections.push_back({eng, generic ? generic_label(rng) : family_label(family, rng)});
  }
  return rep;
}

}  // namespace

double DownloaderSpec::cnc_availability(const Date& d) const {
  for (const auto& span : cnc_uptime)
    if (span.interval.contains(d)) return span.availability;
  return 1.0;
}

void validate_scenario(const Scenario& s) {
  if (s.date_range.end < s.date_range.start)
    throw std::invalid_argument("scenario: empty date range");
  if (s.downloader_families.empty())
    throw std::invalid_argument("scenario: no downloader families");
  if (s.av_engine_count <= 0)
    throw std::invalid_argument("scenario: av_engine_count must be positive");
  for (const auto& d : s.downloader_families) {
    if (d.base_detonation_rate < 0.0 || d.base_detonation_rate > 1.0)
      throw std::invalid_argument("scenario: base_detonation_rate outside [0,1]");
    bool any_positive = false;
    for (const auto& [fam, w] : d.payload_mix) {
      if (w < 0.0) throw std::invalid_argument("scenario: negative mix weight");
      any_positive |= w > 0.0;
    }
    if (!any_positive)
      throw std::invalid_argument("scenario: payload_mix needs a positive weight");
    for (const auto& r : d.targeting_rules)
      if (r.rate_multiplier < 0.0)
        throw std::invalid_argument("scenario: negative rule multiplier");
    for (const auto& span : d.cnc_uptime)
      if (span.availability < 0.0 || span.availability > 1.0)
        throw std::invalid_argument("scenario: availability outside [0,1]");
  }
}

SimOutput simulate(const Scenario& scenario, const ExperimentPlan& plan) {
  validate_scenario(scenario);
  if (plan.profiles.empty()) throw std::invalid_argument("simulate: empty profile matrix");

  SimOutput out;
  out.truth = planted_truth(scenario);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  for (Date day = scenario.date_range.start; day <= scenario.date_range.end; ++day) {
    for (std::size_t fi = 0; fi < scenario.downloader_families.size(); ++fi) {
      const auto& spec = scenario.downloader_families[fi];
      auto rng = cell_rng(scenario.seed, day, spec.name);
      const int n_samples =
          samples_available(spec, day, plan.samples_per_family_per_day);
      const double avail = spec.cnc_availability(day);

      for (int si = 0; si < n_samples; ++si) {
        const std::string sample_id = hex_id(rng);
        for (std::size_t pi = 0; pi < plan.profiles.size(); ++pi) {
          const auto& profile = plan.profiles[pi];

          ExecutionRecord rec;
          char rid[64];
          std::snprintf(rid, sizeof rid, "%04d%02u%02u-f%zu-s%02d-p%03zu",
                        day.year(), day.month(), day.day_of_month(), fi, si, pi);
          rec.run_id = rid;
          rec.date = day;
          rec.minute_of_day = int(rng() % 1440);
          rec.downloader_family = spec.name;
          rec.sample_id = sample_id;
          rec.profile = profile;

          double rate = spec.base_detonation_rate * avail;
          std::map<std::string, double> mix = spec.payload_mix;
          for (const auto& rule : spec.targeting_rules) {
            if (!rule.active.contains(day)) continue;
            auto it = profile.assignments.find(rule.feature);
            if (it == profile.assignments.end() || it->second != rule.matched_value)
              continue;
            rate *= rule.rate_multiplier;
            if (auto mit = mix.find(rule.payload_family); mit != mix.end())
              mit->second *= rule.rate_multiplier;
          }
          rate = std::clamp(rate, 0.0, 1.0);

          rec.detonated = u(rng) < rate;
          if (rec.detonated) {
            const double extra = u(rng);
            int n_payloads = 1;
            if (extra < scenario.triple_payload_rate)
              n_payloads = 3;
            else if (extra < scenario.triple_payload_rate + scenario.double_payload_rate)
              n_payloads = 2;

            double total = 0.0;
            for (const auto& [fam, w] : mix) total += w;
            for (int k = 0; k < n_payloads; ++k) {
              std::string fam;
              double pick = u(rng) * total, acc = 0.0;
              for (const auto& [f, w] : mix) {
                acc += w;
                if (pick <= acc) { fam = f; break; }
              }
              if (fam.empty()) fam = mix.rbegin()->first;
              PayloadRef ref{hex_id(rng), "x-dosexec"};
              out.reports.push_back(scan_payload(ref.payload_id, fam, true, scenario, rng));
              rec.payloads.push_back(std::move(ref));
            }
          } else if (u(rng) < scenario.failed_payload_rate) {
            // Failure still leaves a text/html artifact behind.
            PayloadRef ref{hex_id(rng), (rng() % 2) ? "html" : "plain"};
            out.reports.push_back(scan_payload(ref.payload_id, "", false, scenario, rng));
            rec.payloads.push_back(std::move(ref));
          }
          out.records.push_back(std::move(rec));
        }
      }
    }
  }
  return out;
}

TargetingTruth planted_truth(const Scenario& scenario) {
  TargetingTruth truth;
  for (const auto& spec : scenario.downloader_families) {
    for (const auto& r : spec.targeting_rules)
      truth.targets.push_back(
          {r.feature, r.matched_value, r.payload_family, r.rate_multiplier, r.active});
    for (const auto& span : spec.cnc_uptime)
      truth.uptimes.push_back({spec.name, span.interval, span.availability});
  }
  std::stable_sort(truth.targets.begin(), truth.targets.end(),
                   [](const PlantedTarget& a, const PlantedTarget& b) {
                     return a.interval.start < b.interval.start;
                   });
  return truth;
}

Scenario scenario_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  nlohmann::json j;
  in >> j;

  Scenario sc;
  sc.seed = j.value("seed", std::uint64_t(0));
  sc.date_range.start = Date::parse(j.at("date_range").at("start").get<std::string>());
  sc.date_range.end = Date::parse(j.at("date_range").at("end").get<std::string>());
  sc.av_engine_count = j.value("av_engine_count", 60);
  if (j.contains("av")) {
    const auto& ja = j["av"];
    sc.av.malicious_detect_rate = ja.value("malicious_detect_rate", sc.av.malicious_detect_rate);
    sc.av.generic_label_rate = ja.value("generic_label_rate", sc.av.generic_label_rate);
    sc.av.benign_flag_rate = ja.value("benign_flag_rate", sc.av.benign_flag_rate);
  }
  sc.failed_payload_rate = j.value("failed_payload_rate", sc.failed_payload_rate);
  sc.double_payload_rate = j.value("double_payload_rate", sc.double_payload_rate);
  sc.triple_payload_rate = j.value("triple_payload_rate", sc.triple_payload_rate);

  for (const auto& jd : j.at("downloaders")) {
    DownloaderSpec d;
    d.name = jd.at("name").get<std::string>();
    d.base_detonation_rate = jd.at("base_detonation_rate").get<double>();
    d.daily_fresh_samples = jd.value("daily_fresh_samples", 10);
    d.sample_availability = jd.value("sample_availability", 1.0);
    for (const auto& [fam, w] : jd.at("payload_mix").items())
      d.payload_mix[fam] = w.get<double>();
    if (jd.contains("cnc_uptime"))
      for (const auto& js : jd["cnc_uptime"])
        d.cnc_uptime.push_back({{Date::parse(js.at("start").get<std::string>()),
                                 Date::parse(js.at("end").get<std::string>())},
                                js.at("availability").get<double>()});
    if (jd.contains("targeting_rules"))
      for (const auto& jr : jd["targeting_rules"]) {
        TargetingRule r;
        r.feature = jr.at("feature").get<std::string>();
        r.matched_value = jr.at("value").get<std::string>();
        r.payload_family = jr.at("payload_family").get<std::string>();
        r.rate_multiplier = jr.at("multiplier").get<double>();
        r.active.start = jr.contains("start")
                             ? Date::parse(jr["start"].get<std::string>())
                             : sc.date_range.start;
        r.active.end = jr.contains("end") ? Date::parse(jr["end"].get<std::string>())
                                          : sc.date_range.end;
        d.targeting_rules.push_back(std::move(r));
      }
    sc.downloader_families.push_back(std::move(d));
  }
  validate_scenario(sc);
  return sc;
}

void truth_to_json_file(const TargetingTruth& truth, const std::string& path) {
  nlohmann::json j;
  j["targets"] = nlohmann::json::array();
  for (const auto& t : truth.targets)
    j["targets"].push_back({{"feature", t.feature},
                            {"value", t.value},
                            {"payload_family", t.payload_family},
                            {"multiplier", t.multiplier},
                            {"start", t.interval.start.str()},
                            {"end", t.interval.end.str()}});
  j["uptimes"] = nlohmann::json::array();
  for (const auto& up : truth.uptimes)
    j["uptimes"].push_back({{"downloader", up.downloader_family},
                            {"start", up.interval.start.str()},
                            {"end", up.interval.end.str()},
                            {"availability", up.availability}});
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

}  // namespace droptrace
