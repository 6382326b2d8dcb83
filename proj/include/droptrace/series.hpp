#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "droptrace/date.hpp"
#include "droptrace/label.hpp"
#include "droptrace/plan.hpp"
#include "droptrace/records.hpp"

namespace droptrace {

struct DayCounts {
  Date date;
  int runs = 0;
  int infections = 0;       // runs that dropped >= 1 malicious target-family payload
  int dropped_payloads = 0;  // malicious target-family payloads, counted per payload

  // Undefined when the value had no runs that day (machine offline analog).
  std::optional<double> ratio() const {
    if (runs == 0) return std::nullopt;
    return double(infections) / double(runs);
  }
};

// Per-(downloader family, payload family, feature) daily infection series,
// one row list per feature value.
struct InfectionSeries {
  std::string downloader_family;
  std::string payload_family;
  std::string feature;
  std::map<std::string, std::vector<DayCounts>> per_value;  // dates ascending
};

struct BinCounts {
  Date anchor;  // 4th, 12th, 20th or 28th of a month
  int infections = 0;
  int dropped_payloads = 0;
};

struct BinnedSeries {
  std::string downloader_family;
  std::string payload_family;
  std::string feature;
  std::map<std::string, std::vector<BinCounts>> per_value;
};

// Day-of-month 1-8 -> 4, 9-16 -> 12, 17-24 -> 20, 25-end -> 28.
Date bin_anchor(const Date& d);

// Monday of the week containing d; the weekly aggregation granularity.
Date week_anchor(const Date& d);

// Aggregate labeled runs for one analysis cell. `feature` must be in the
// catalog; every catalog value of it gets a (possibly empty) row list.
InfectionSeries build_series(const std::vector<ExecutionRecord>& runs,
                             const std::vector<PayloadLabel>& labels,
                             const Catalog& catalog,
                             const std::string& downloader_family,
                             const std::string& payload_family,
                             const std::string& feature);

// Associative merge of partial aggregations over a partitioned stream.
InfectionSeries merge_series(const InfectionSeries& a, const InfectionSeries& b);

BinnedSeries bin_monthly(const InfectionSeries& series);

// Weekly counterpart of bin_monthly; anchors are Mondays.
BinnedSeries bin_weekly(const InfectionSeries& series);

// Daily ratio table filtered to days where at least one value of the
// feature saw an infection, optionally restricted to an explicit window.
struct RatioRow {
  Date date;
  std::map<std::string, std::optional<double>> ratio_by_value;
};

std::vector<RatioRow> analysis_window(const InfectionSeries& series,
                                      std::optional<DateInterval> window = {});

// All bin anchors whose month-quarter overlaps the range, ascending.
std::vector<Date> bin_anchors(const DateInterval& range);

// Dense infection-count signal for one value over a fixed anchor grid;
// anchors with no data contribute 0.
std::vector<double> binned_signal(const BinnedSeries& s, const std::string& value,
                                  const std::vector<Date>& anchors);

void series_to_json_file(const InfectionSeries& s, const std::string& path);
InfectionSeries series_from_json_file(const std::string& path);
void series_to_csv_file(const InfectionSeries& s, const std::string& path);
void binned_to_csv_file(const BinnedSeries& s, const std::string& path);

}  // namespace droptrace
