#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "droptrace/series.hpp"

using namespace droptrace;

namespace {

Catalog two_value_catalog() {
  return {{"keyboard", {"English", "Portuguese"}, "English"}};
}

MachineProfile profile_with(const std::string& value) {
  MachineProfile p;
  p.assignments["keyboard"] = value;
  return p;
}

ExecutionRecord run_on(const Date& d, const std::string& value,
                       std::vector<std::string> payload_ids, int idx) {
  ExecutionRecord r;
  r.run_id = d.str() + "-" + value + "-" + std::to_string(idx);
  r.date = d;
  r.downloader_family = "downA";
  r.profile = profile_with(value);
  r.detonated = !payload_ids.empty();
  for (auto& id : payload_ids) r.payloads.push_back({std::move(id), "x-dosexec"});
  return r;
}

PayloadLabel target_label(const std::string& payload_id) {
  PayloadLabel l;
  l.payload_id = payload_id;
  l.malicious = true;
  l.family = "famX";
  l.positive_count = 10;
  return l;
}

}  // namespace

TEST_CASE("bin anchors per day-of-month band") {
  CHECK(bin_anchor(Date(2018, 5, 1)) == Date(2018, 5, 4));
  CHECK(bin_anchor(Date(2018, 5, 8)) == Date(2018, 5, 4));
  CHECK(bin_anchor(Date(2018, 5, 9)) == Date(2018, 5, 12));
  CHECK(bin_anchor(Date(2018, 5, 16)) == Date(2018, 5, 12));
  CHECK(bin_anchor(Date(2018, 5, 17)) == Date(2018, 5, 20));
  CHECK(bin_anchor(Date(2018, 5, 24)) == Date(2018, 5, 20));
  CHECK(bin_anchor(Date(2018, 5, 25)) == Date(2018, 5, 28));
  CHECK(bin_anchor(Date(2018, 5, 31)) == Date(2018, 5, 28));
}

TEST_CASE("week anchor is the containing Monday") {
  // 2018-05-07 was a Monday
  CHECK(week_anchor(Date(2018, 5, 7)) == Date(2018, 5, 7));
  CHECK(week_anchor(Date(2018, 5, 9)) == Date(2018, 5, 7));
  CHECK(week_anchor(Date(2018, 5, 13)) == Date(2018, 5, 7));
  CHECK(week_anchor(Date(2018, 5, 14)) == Date(2018, 5, 14));
}

TEST_CASE("empty stream yields all-empty per_value rows for every value") {
  const auto s = build_series({}, {}, two_value_catalog(), "downA", "famX",
                              "keyboard");
  REQUIRE(s.per_value.size() == 2);
  CHECK(s.per_value.at("English").empty());
  CHECK(s.per_value.at("Portuguese").empty());
}

TEST_CASE("counting oracle: 10 runs, 4 infected, ratio 0.4") {
  const Date d(2018, 3, 6);
  std::vector<ExecutionRecord> runs;
  std::vector<PayloadLabel> labels;
  for (int i = 0; i < 10; ++i) {
    if (i < 4) {
      const std::string pid = "p" + std::to_string(i);
      runs.push_back(run_on(d, "English", {pid}, i));
      labels.push_back(target_label(pid));
    } else {
      runs.push_back(run_on(d, "English", {}, i));
    }
  }
  const auto s =
      build_series(runs, labels, two_value_catalog(), "downA", "famX", "keyboard");
  REQUIRE(s.per_value.at("English").size() == 1);
  const auto& day = s.per_value.at("English")[0];
  CHECK(day.runs == 10);
  CHECK(day.infections == 4);
  CHECK(day.dropped_payloads == 4);
  CHECK(*day.ratio() == doctest::Approx(0.4));
}

TEST_CASE("double payload: one infection, two dropped payloads") {
  const Date d(2018, 3, 6);
  const std::vector<ExecutionRecord> runs = {run_on(d, "English", {"pa", "pb"}, 0)};
  const std::vector<PayloadLabel> labels = {target_label("pa"), target_label("pb")};
  const auto s =
      build_series(runs, labels, two_value_catalog(), "downA", "famX", "keyboard");
  const auto& day = s.per_value.at("English")[0];
  CHECK(day.runs == 1);
  CHECK(day.infections == 1);
  CHECK(day.dropped_payloads == 2);
}

TEST_CASE("non-target payloads never count as infections") {
  const Date d(2018, 3, 6);
  const std::vector<ExecutionRecord> runs = {run_on(d, "English", {"px"}, 0)};
  PayloadLabel other = target_label("px");
  other.family = "famY";
  const auto s = build_series(runs, {other}, two_value_catalog(), "downA", "famX",
                              "keyboard");
  const auto& day = s.per_value.at("English")[0];
  CHECK(day.runs == 1);
  CHECK(day.infections == 0);
  CHECK(day.dropped_payloads == 0);
}

TEST_CASE("unknown feature is a catalog error") {
  CHECK_THROWS_AS(
      build_series({}, {}, two_value_catalog(), "downA", "famX", "display"),
      std::invalid_argument);
}

TEST_CASE("activity on the 1st lands in the anchor-4 bin") {
  const Date d(2018, 5, 1);
  const std::vector<ExecutionRecord> runs = {run_on(d, "English", {"p0"}, 0)};
  const auto s = build_series(runs, {target_label("p0")}, two_value_catalog(),
                              "downA", "famX", "keyboard");
  const auto binned = bin_monthly(s);
  REQUIRE(binned.per_value.at("English").size() == 1);
  CHECK(binned.per_value.at("English")[0].anchor == Date(2018, 5, 4));
  CHECK(binned.per_value.at("English")[0].infections == 1);
}

TEST_CASE("uniform one infection per day over 30 days bins to 8,8,8,6") {
  std::vector<ExecutionRecord> runs;
  std::vector<PayloadLabel> labels;
  for (int i = 0; i < 30; ++i) {
    const std::string pid = "p" + std::to_string(i);
    runs.push_back(run_on(Date(2018, 4, 1) + i, "English", {pid}, i));
    labels.push_back(target_label(pid));
  }
  const auto s =
      build_series(runs, labels, two_value_catalog(), "downA", "famX", "keyboard");
  const auto binned = bin_monthly(s);
  const auto& bins = binned.per_value.at("English");
  REQUIRE(bins.size() == 4);
  CHECK(bins[0].infections == 8);
  CHECK(bins[1].infections == 8);
  CHECK(bins[2].infections == 8);
  CHECK(bins[3].infections == 6);  // April has 30 days: 25th-30th
}

TEST_CASE("31-day month: last bin covers 7 days") {
  std::vector<ExecutionRecord> runs;
  std::vector<PayloadLabel> labels;
  for (int i = 0; i < 31; ++i) {
    const std::string pid = "p" + std::to_string(i);
    runs.push_back(run_on(Date(2018, 5, 1) + i, "English", {pid}, i));
    labels.push_back(target_label(pid));
  }
  const auto s =
      build_series(runs, labels, two_value_catalog(), "downA", "famX", "keyboard");
  const auto& bins = bin_monthly(s).per_value.at("English");
  REQUIRE(bins.size() == 4);
  CHECK(bins[3].infections == 7);
}

TEST_CASE("conservation: binned sums equal daily sums per value") {
  std::mt19937 rng(17);
  std::vector<ExecutionRecord> runs;
  std::vector<PayloadLabel> labels;
  int next_pid = 0;
  for (int i = 0; i < 400; ++i) {
    const Date d = Date(2018, 3, 1) + int(rng() % 120);
    const std::string value = (rng() % 2) ? "English" : "Portuguese";
    if (rng() % 3 == 0) {
      const std::string pid = "p" + std::to_string(next_pid++);
      runs.push_back(run_on(d, value, {pid}, i));
      labels.push_back(target_label(pid));
    } else {
      runs.push_back(run_on(d, value, {}, i));
    }
  }
  const auto s =
      build_series(runs, labels, two_value_catalog(), "downA", "famX", "keyboard");
  const auto monthly = bin_monthly(s);
  const auto weekly = bin_weekly(s);
  for (const auto* binned : {&monthly, &weekly}) {
    for (const auto& [value, rows] : s.per_value) {
      int daily = 0, daily_dropped = 0;
      for (const auto& r : rows) {
        daily += r.infections;
        daily_dropped += r.dropped_payloads;
        CHECK(r.infections <= r.runs);
        if (auto ratio = r.ratio()) {
          CHECK(*ratio >= 0.0);
          CHECK(*ratio <= 1.0);
        }
      }
      int bin_total = 0, bin_dropped = 0;
      for (const auto& b : binned->per_value.at(value)) {
        bin_total += b.infections;
        bin_dropped += b.dropped_payloads;
      }
      CHECK(bin_total == daily);
      CHECK(bin_dropped == daily_dropped);
    }
  }
}

TEST_CASE("aggregation linearity: partitioned build + merge equals whole build") {
  std::mt19937 rng(18);
  std::vector<ExecutionRecord> runs;
  std::vector<PayloadLabel> labels;
  int next_pid = 0;
  for (int i = 0; i < 200; ++i) {
    const Date d = Date(2018, 3, 1) + int(rng() % 40);
    const std::string value = (rng() % 2) ? "English" : "Portuguese";
    if (rng() % 4 == 0) {
      const std::string pid = "p" + std::to_string(next_pid++);
      runs.push_back(run_on(d, value, {pid}, i));
      labels.push_back(target_label(pid));
    } else {
      runs.push_back(run_on(d, value, {}, i));
    }
  }
  const Catalog cat = two_value_catalog();
  const auto whole = build_series(runs, labels, cat, "downA", "famX", "keyboard");

  const std::size_t cut = runs.size() / 3;
  const std::vector<ExecutionRecord> part_a(runs.begin(), runs.begin() + cut);
  const std::vector<ExecutionRecord> part_b(runs.begin() + cut, runs.end());
  const auto merged =
      merge_series(build_series(part_a, labels, cat, "downA", "famX", "keyboard"),
                   build_series(part_b, labels, cat, "downA", "famX", "keyboard"));
  // merge is commutative too
  const auto merged_swapped =
      merge_series(build_series(part_b, labels, cat, "downA", "famX", "keyboard"),
                   build_series(part_a, labels, cat, "downA", "famX", "keyboard"));

  for (const auto* m : {&merged, &merged_swapped}) {
    REQUIRE(m->per_value.size() == whole.per_value.size());
    for (const auto& [value, rows] : whole.per_value) {
      const auto& mrows = m->per_value.at(value);
      REQUIRE(mrows.size() == rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(mrows[i].date == rows[i].date);
        CHECK(mrows[i].runs == rows[i].runs);
        CHECK(mrows[i].infections == rows[i].infections);
        CHECK(mrows[i].dropped_payloads == rows[i].dropped_payloads);
      }
    }
  }
}

TEST_CASE("analysis window keeps only days with at least one infection") {
  std::vector<ExecutionRecord> runs;
  std::vector<PayloadLabel> labels;
  // 10 days; days 2, 5 and 8 (0-based) have no infection anywhere
  int next_pid = 0;
  for (int i = 0; i < 10; ++i) {
    const Date d = Date(2018, 3, 1) + i;
    const bool dead = i == 2 || i == 5 || i == 8;
    if (!dead) {
      const std::string pid = "p" + std::to_string(next_pid++);
      runs.push_back(run_on(d, "English", {pid}, 2 * i));
      labels.push_back(target_label(pid));
    } else {
      runs.push_back(run_on(d, "English", {}, 2 * i));
    }
    runs.push_back(run_on(d, "Portuguese", {}, 2 * i + 1));
  }
  const auto s =
      build_series(runs, labels, two_value_catalog(), "downA", "famX", "keyboard");
  const auto rows = analysis_window(s);
  CHECK(rows.size() == 7);
  for (const auto& row : rows) {
    // every value has a slot, possibly without data
    CHECK(row.ratio_by_value.size() == 2);
    CHECK(*row.ratio_by_value.at("English") == doctest::Approx(1.0));
    CHECK(*row.ratio_by_value.at("Portuguese") == doctest::Approx(0.0));
  }

  // explicit window restriction applies on top of the infection filter
  const auto windowed = analysis_window(
      s, DateInterval{Date(2018, 3, 1), Date(2018, 3, 4)});
  CHECK(windowed.size() == 3);  // days 0,1,3 infected within the window
}

TEST_CASE("value with zero runs on a day appears as an empty ratio slot") {
  std::vector<ExecutionRecord> runs = {run_on(Date(2018, 3, 1), "English", {"p0"}, 0)};
  const auto s = build_series(runs, {target_label("p0")}, two_value_catalog(),
                              "downA", "famX", "keyboard");
  const auto rows = analysis_window(s);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].ratio_by_value.at("Portuguese").has_value());
}

TEST_CASE("bin anchor grid and dense signals") {
  const DateInterval range{Date(2018, 3, 20), Date(2018, 4, 10)};
  const auto anchors = bin_anchors(range);
  REQUIRE(anchors.size() == 4);
  CHECK(anchors[0] == Date(2018, 3, 20));
  CHECK(anchors[1] == Date(2018, 3, 28));
  CHECK(anchors[2] == Date(2018, 4, 4));
  CHECK(anchors[3] == Date(2018, 4, 12));

  BinnedSeries bs;
  bs.per_value["English"] = {{Date(2018, 3, 28), 5, 7}};
  const auto signal = binned_signal(bs, "English", anchors);
  CHECK(signal == std::vector<double>{0.0, 5.0, 0.0, 0.0});
  CHECK(binned_signal(bs, "missing", anchors) ==
        std::vector<double>(4, 0.0));
}

TEST_CASE("series files round trip") {
  std::vector<ExecutionRecord> runs = {run_on(Date(2018, 3, 1), "English", {"p0"}, 0),
                                       run_on(Date(2018, 3, 2), "Portuguese", {}, 1)};
  const auto s = build_series(runs, {target_label("p0")}, two_value_catalog(),
                              "downA", "famX", "keyboard");
  const std::string path = "test_series_tmp.json";
  series_to_json_file(s, path);
  const auto back = series_from_json_file(path);
  CHECK(back.feature == "keyboard");
  CHECK(back.per_value.at("English").size() == 1);
  CHECK(back.per_value.at("English")[0].infections == 1);
  CHECK(back.per_value.at("Portuguese")[0].runs == 1);
  std::remove(path.c_str());
}
