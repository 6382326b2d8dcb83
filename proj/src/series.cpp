#include "droptrace/series.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace droptrace {

Date bin_anchor(const Date& d) {
  const unsigned dom = d.day_of_month();
  unsigned anchor = 28;
  if (dom <= 8)
    anchor = 4;
  else if (dom <= 16)
    anchor = 12;
  else if (dom <= 24)
    anchor = 20;
  return Date(d.year(), d.month(), anchor);
}

Date week_anchor(const Date& d) {
  const std::chrono::weekday wd{d.sys()};
  return d - int((wd - std::chrono::Monday).count());
}

InfectionSeries build_series(const std::vector<ExecutionRecord>& runs,
                             const std::vector<PayloadLabel>& labels,
                             const Catalog& catalog,
                             const std::string& downloader_family,
                             const std::string& payload_family,
                             const std::string& feature) {
  const Feature* feat = nullptr;
  for (const auto& f : catalog)
    if (f.name == feature) feat = &f;
  if (!feat) throw std::invalid_argument("build_series: unknown feature " + feature);

  // payload_id -> is malicious payload of the target family
  std::unordered_set<std::string> target_payloads;
  for (const auto& l : labels)
    if (l.malicious && l.family == payload_family) target_payloads.insert(l.payload_id);

  InfectionSeries series;
  series.downloader_family = downloader_family;
  series.payload_family = payload_family;
  series.feature = feature;

  // value -> date ordinal -> counts
  std::map<std::string, std::map<Date, DayCounts>> acc;
  for (const auto& v : feat->values) acc[v];

  for (const auto& run : runs) {
    if (run.downloader_family != downloader_family) continue;
    auto it = run.profile.assignments.find(feature);
    if (it == run.profile.assignments.end()) continue;
    auto vit = acc.find(it->second);
    if (vit == acc.end()) continue;  // value outside the catalog; skip

    DayCounts& day = vit->second[run.date];
    day.date = run.date;
    ++day.runs;
    int dropped = 0;
    for (const auto& p : run.payloads)
      if (target_payloads.count(p.payload_id)) ++dropped;
    if (dropped > 0) ++day.infections;  // infection is per run
    day.dropped_payloads += dropped;    // payload count is per payload
  }

  for (auto& [value, by_date] : acc) {
    auto& rows = series.per_value[value];
    for (auto& [date, counts] : by_date) rows.push_back(counts);
  }
  return series;
}

InfectionSeries merge_series(const InfectionSeries& a, const InfectionSeries& b) {
  if (a.downloader_family != b.downloader_family ||
      a.payload_family != b.payload_family || a.feature != b.feature)
    throw std::invalid_argument("merge_series: mismatched series keys");
  InfectionSeries out = a;
  for (const auto& [value, rows] : b.per_value) {
    auto& dst = out.per_value[value];
    for (const auto& row : rows) {
      auto it = std::lower_bound(dst.begin(), dst.end(), row,
                                 [](const DayCounts& x, const DayCounts& y) {
                                   return x.date < y.date;
                                 });
      if (it != dst.end() && it->date == row.date) {
        it->runs += row.runs;
        it->infections += row.infections;
        it->dropped_payloads += row.dropped_payloads;
      } else {
        dst.insert(it, row);
      }
    }
  }
  return out;
}

namespace {

BinnedSeries bin_by(const InfectionSeries& series, Date (*anchor_of)(const Date&)) {
  BinnedSeries out;
  out.downloader_family = series.downloader_family;
  out.payload_family = series.payload_family;
  out.feature = series.feature;
  for (const auto& [value, rows] : series.per_value) {
    std::map<Date, BinCounts> bins;
    for (const auto& row : rows) {
      const Date anchor = anchor_of(row.date);
      BinCounts& b = bins[anchor];
      b.anchor = anchor;
      b.infections += row.infections;
      b.dropped_payloads += row.dropped_payloads;
    }
    auto& dst = out.per_value[value];
    for (const auto& [anchor, counts] : bins) dst.push_back(counts);
  }
  return out;
}

}  // namespace

BinnedSeries bin_monthly(const InfectionSeries& series) {
  return bin_by(series, bin_anchor);
}

BinnedSeries bin_weekly(const InfectionSeries& series) {
  return bin_by(series, week_anchor);
}

std::vector<RatioRow> analysis_window(const InfectionSeries& series,
                                      std::optional<DateInterval> window) {
  std::map<Date, RatioRow> rows;
  std::map<Date, bool> any_infection;
  for (const auto& [value, day_rows] : series.per_value) {
    for (const auto& day : day_rows) {
      if (window && !window->contains(day.date)) continue;
      RatioRow& row = rows[day.date];
      row.date = day.date;
      row.ratio_by_value[value] = day.ratio();
      if (day.infections > 0) any_infection[day.date] = true;
    }
  }
  std::vector<RatioRow> out;
  for (auto& [date, row] : rows) {
    if (!any_infection[date]) continue;  // keep days with >= 1 infection somewhere
    // values with no runs that day appear as empty ratio slots
    for (const auto& [value, ignored] : series.per_value)
      row.ratio_by_value.try_emplace(value, std::nullopt);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<Date> bin_anchors(const DateInterval& range) {
  std::vector<Date> out;
  for (Date d = range.start; d <= range.end; ++d) {
    const Date a = bin_anchor(d);
    if (out.empty() || out.back() != a) out.push_back(a);
  }
  return out;
}

std::vector<double> binned_signal(const BinnedSeries& s, const std::string& value,
                                  const std::vector<Date>& anchors) {
  std::map<Date, int> by_anchor;
  if (auto it = s.per_value.find(value); it != s.per_value.end())
    for (const auto& b : it->second) by_anchor[b.anchor] = b.infections;
  std::vector<double> signal;
  signal.reserve(anchors.size());
  for (const auto& a : anchors) {
    auto it = by_anchor.find(a);
    signal.push_back(it == by_anchor.end() ? 0.0 : double(it->second));
  }
  return signal;
}

namespace {
using nlohmann::json;
}

void series_to_json_file(const InfectionSeries& s, const std::string& path) {
  json j{{"downloader", s.downloader_family},
         {"payload_family", s.payload_family},
         {"feature", s.feature}};
  j["per_value"] = json::object();
  for (const auto& [value, rows] : s.per_value) {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"date", r.date.str()},
                     {"runs", r.runs},
                     {"infections", r.infections},
                     {"dropped", r.dropped_payloads}});
    j["per_value"][value] = std::move(arr);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

InfectionSeries series_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  InfectionSeries s;
  s.downloader_family = j.at("downloader").get<std::string>();
  s.payload_family = j.at("payload_family").get<std::string>();
  s.feature = j.at("feature").get<std::string>();
  for (const auto& [value, arr] : j.at("per_value").items()) {
    auto& rows = s.per_value[value];
    for (const auto& jr : arr) {
      DayCounts d;
      d.date = Date::parse(jr.at("date").get<std::string>());
      d.runs = jr.at("runs").get<int>();
      d.infections = jr.at("infections").get<int>();
      d.dropped_payloads = jr.at("dropped").get<int>();
      rows.push_back(d);
    }
  }
  return s;
}

void series_to_csv_file(const InfectionSeries& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "value,date,runs,infections,dropped_payloads,ratio\n";
  for (const auto& [value, rows] : s.per_value)
    for (const auto& r : rows) {
      out << value << ',' << r.date.str() << ',' << r.runs << ',' << r.infections
          << ',' << r.dropped_payloads << ',';
      if (auto ratio = r.ratio()) out << *ratio;
      out << '\n';
    }
}

void binned_to_csv_file(const BinnedSeries& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "value,bin_anchor,infections,dropped_payloads\n";
  for (const auto& [value, bins] : s.per_value)
    for (const auto& b : bins)
      out << value << ',' << b.anchor.str() << ',' << b.infections << ','
          << b.dropped_payloads << '\n';
}

}  // namespace droptrace
