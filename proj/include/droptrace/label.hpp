#pragma once

#include <map>
#include <string>
#include <vector>

#include "droptrace/records.hpp"

namespace droptrace {

inline constexpr char kSingleton[] = "SINGLETON";

struct LabelPolicy {
  int positive_threshold = 5;
  std::vector<std::string> generic_patterns = {"generic", "heur", "agent",
                                               "variant", "strictor"};
  // Platform/type prefixes stripped before family matching.
  std::vector<std::string> token_stoplist = {"trojan", "win32", "w32", "win64",
                                             "downloader", "trojandownloader",
                                             "gen", "malware", "script"};
  std::vector<std::string> priority_families = {"Eldorado", "Adware", "KillAV",
                                                "Psyme",    "Banload",
                                                "InstallMonster"};
  std::size_t min_token_length = 4;
};

struct PayloadLabel {
  std::string payload_id;
  bool malicious = false;
  std::string family = kSingleton;
  int positive_count = 0;
  std::map<std::string, int> evidence;  // family token -> vote count
};

LabelPolicy policy_from_json_file(const std::string& path);

// Family-token extraction from one vendor label string: split on
// non-alphanumeric separators, drop stoplisted/generic/short/numeric
// tokens. Known priority families keep their canonical casing.
std::vector<std::string> extract_family_tokens(const std::string& label,
                                               const LabelPolicy& policy);

PayloadLabel label_payload(const AvReport& report, const LabelPolicy& policy);

// Highest vote count wins; ties broken by priority-list position, then
// lexicographically. Votes must be non-empty.
std::string tie_break(const std::map<std::string, int>& votes,
                      const LabelPolicy& policy);

std::vector<PayloadLabel> label_all(const std::vector<AvReport>& reports,
                                    const LabelPolicy& policy);

void write_labels(const std::string& path, const std::vector<PayloadLabel>& labels);
std::vector<PayloadLabel> read_labels(const std::string& path);

}  // namespace droptrace
