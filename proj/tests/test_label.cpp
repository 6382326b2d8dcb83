#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "droptrace/label.hpp"

using namespace droptrace;

namespace {

AvReport make_report(const std::vector<std::string>& labels) {
  AvReport r;
  r.payload_id = "deadbeef";
  r.scanned_at = Date(2019, 3, 1);
  r.engine_count = 60;
  for (std::size_t i = 0; i < labels.size(); ++i)
    r.detections.push_back({"av" + std::to_string(i), labels[i]});
  return r;
}

}  // namespace

TEST_CASE("token extraction") {
  const LabelPolicy policy;
  CHECK(extract_family_tokens("Trojan.Generic.12345", policy).empty());
  CHECK(extract_family_tokens("", policy).empty());

  const auto toks = extract_family_tokens("Win32/TrojanDownloader.Banload.ABC", policy);
  REQUIRE(toks.size() == 1);
  CHECK(toks[0] == "Banload");

  // canonical casing restored for known families
  const auto lower = extract_family_tokens("win32/banload.xyzq", policy);
  REQUIRE(lower.size() >= 1);
  CHECK(lower[0] == "Banload");

  // generic patterns are substring matches
  CHECK(extract_family_tokens("HEUR:Trojan.Script.1000", policy).empty());
  CHECK(extract_family_tokens("Gen:Variant.Strictor.999", policy).empty());
}

TEST_CASE("positive threshold boundary at 5") {
  const LabelPolicy policy;
  const auto benign =
      label_payload(make_report({"Trojan.Banload.1", "Trojan.Banload.2",
                                 "Trojan.Banload.3", "Trojan.Banload.4"}),
                    policy);
  CHECK_FALSE(benign.malicious);
  CHECK(benign.positive_count == 4);
  CHECK(benign.family == "Banload");  // family still recorded

  const auto malicious =
      label_payload(make_report({"Trojan.Banload.1", "Trojan.Banload.2",
                                 "Trojan.Banload.3", "Trojan.Banload.4",
                                 "Trojan.Banload.5"}),
                    policy);
  CHECK(malicious.malicious);
  CHECK(malicious.positive_count == 5);
}

TEST_CASE("priority list beats raw majority") {
  const LabelPolicy policy;
  std::vector<std::string> labels;
  for (int i = 0; i < 6; ++i) labels.push_back("Trojan.Eldorado.1");
  for (int i = 0; i < 9; ++i) labels.push_back("Trojan.SomeOtherFam.1");
  const auto l = label_payload(make_report(labels), policy);
  CHECK(l.malicious);
  CHECK(l.family == "Eldorado");
  CHECK(l.evidence.at("Eldorado") == 6);
  CHECK(l.evidence.at("SomeOtherFam") == 9);
}

TEST_CASE("all-generic report is a malicious singleton") {
  const LabelPolicy policy;
  std::vector<std::string> labels(7, "Trojan.Generic.777");
  const auto l = label_payload(make_report(labels), policy);
  CHECK(l.malicious);
  CHECK(l.family == kSingleton);
  CHECK(l.evidence.empty());
}

TEST_CASE("tie break: count, then priority order, then lexicographic") {
  const LabelPolicy policy;
  CHECK(tie_break({{"Adware", 3}, {"Psyme", 3}}, policy) == "Adware");
  CHECK(tie_break({{"Xfam", 2}, {"Yfam", 2}}, policy) == "Xfam");
  CHECK(tie_break({{"Banload", 5}}, policy) == "Banload");
  // priority membership beats a lexicographically earlier stranger
  CHECK(tie_break({{"Aaaa", 2}, {"Psyme", 2}}, policy) == "Psyme");
  CHECK_THROWS_AS(tie_break({}, policy), std::invalid_argument);
}

TEST_CASE("engine order never changes the label") {
  const LabelPolicy policy;
  std::vector<std::string> labels = {"Trojan.Psyme.1",  "Trojan.Adware.9",
                                     "Trojan.Psyme.2",  "Win32/Adware.Q",
                                     "Trojan.Psyme.3",  "Trojan.Generic.1",
                                     "W32/KillAV.B"};
  const auto base = label_payload(make_report(labels), policy);
  std::mt19937 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::shuffle(labels.begin(), labels.end(), rng);
    const auto shuffled = label_payload(make_report(labels), policy);
    CHECK(shuffled.family == base.family);
    CHECK(shuffled.malicious == base.malicious);
    CHECK(shuffled.evidence == base.evidence);
  }
}

TEST_CASE("adding a vote for the winner never dethrones it") {
  const LabelPolicy policy;
  std::mt19937 rng(5);
  const std::vector<std::string> fams = {"Psyme", "Adware", "KillAV", "Zfam", "Qfam"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> labels;
    const int n = 5 + int(rng() % 10);
    for (int i = 0; i < n; ++i)
      labels.push_back("Trojan." + fams[rng() % fams.size()] + ".1");
    const auto before = label_payload(make_report(labels), policy);
    if (before.family == kSingleton) continue;
    labels.push_back("Trojan." + before.family + ".1");
    const auto after = label_payload(make_report(labels), policy);
    CHECK(after.family == before.family);
  }
}

TEST_CASE("labeled dataset partitions into priority/other/singleton") {
  const LabelPolicy policy;
  std::mt19937 rng(9);
  std::vector<AvReport> reports;
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> labels;
    const int n = int(rng() % 12);
    for (int j = 0; j < n; ++j) {
      switch (rng() % 3) {
        case 0: labels.push_back("Trojan.Generic.1"); break;
        case 1: labels.push_back("Trojan.Banload.1"); break;
        default: labels.push_back("Trojan.Oddball.1"); break;
      }
    }
    reports.push_back(make_report(labels));
  }
  const auto labels = label_all(reports, policy);
  std::size_t priority = 0, other = 0, singleton = 0;
  for (const auto& l : labels) {
    if (l.family == kSingleton)
      ++singleton;
    else if (std::count(policy.priority_families.begin(),
                        policy.priority_families.end(), l.family))
      ++priority;
    else
      ++other;
  }
  CHECK(priority + other + singleton == labels.size());
  CHECK(priority > 0);
  CHECK(singleton > 0);
}
