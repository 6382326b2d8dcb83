#include "droptrace/label.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace droptrace {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool contains_any(const std::string& hay, const std::vector<std::string>& needles) {
  for (const auto& n : needles)
    if (hay.find(n) != std::string::npos) return true;
  return false;
}

bool all_digits(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

std::size_t priority_index(const std::string& fam, const LabelPolicy& policy) {
  const std::string lf = lower(fam);
  for (std::size_t i = 0; i < policy.priority_families.size(); ++i)
    if (lower(policy.priority_families[i]) == lf) return i;
  return std::numeric_limits<std::size_t>::max();
}

}  // namespace

std::vector<std::string> extract_family_tokens(const std::string& label,
                                               const LabelPolicy& policy) {
  std::vector<std::string> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::string t = std::move(token);
    token.clear();
    if (t.size() < policy.min_token_length || all_digits(t)) return;
    const std::string lt = lower(t);
    if (std::any_of(policy.token_stoplist.begin(), policy.token_stoplist.end(),
                    [&](const std::string& s) { return lt == s; }))
      return;
    if (contains_any(lt, policy.generic_patterns)) return;
    // Known families keep their canonical casing.
    const std::size_t pi = priority_index(t, policy);
    out.push_back(pi == std::numeric_limits<std::size_t>::max()
                      ? t
                      : policy.priority_families[pi]);
  };
  for (unsigned char c : label) {
    if (std::isalnum(c))
      token.push_back(char(c));
    else
      flush();
  }
  flush();
  return out;
}

std::string tie_break(const std::map<std::string, int>& votes,
                      const LabelPolicy& policy) {
  if (votes.empty()) throw std::invalid_argument("tie_break: empty votes");
  const std::string* best = nullptr;
  int best_count = -1;
  std::size_t best_prio = std::numeric_limits<std::size_t>::max();
  for (const auto& [fam, count] : votes) {
    const std::size_t prio = priority_index(fam, policy);
    // map iteration is lexicographic, so on full ties the first seen wins
    if (count > best_count || (count == best_count && prio < best_prio)) {
      best = &fam;
      best_count = count;
      best_prio = prio;
    }
  }
  return *best;
}

PayloadLabel label_payload(const AvReport& report, const LabelPolicy& policy) {
  PayloadLabel label;
  label.payload_id = report.payload_id;
  label.positive_count = int(report.detections.size());
  label.malicious = label.positive_count >= policy.positive_threshold;

  for (const auto& det : report.detections)
    for (const auto& tok : extract_family_tokens(det.label, policy))
      ++label.evidence[tok];

  if (label.evidence.empty()) {
    label.family = kSingleton;
    return label;
  }

  // Priority families beat the raw majority when present at all.
  std::map<std::string, int> priority_votes;
  for (const auto& [fam, count] : label.evidence)
    if (priority_index(fam, policy) != std::numeric_limits<std::size_t>::max())
      priority_votes[fam] = count;

  label.family = tie_break(priority_votes.empty() ? label.evidence : priority_votes,
                           policy);
  return label;
}

std::vector<PayloadLabel> label_all(const std::vector<AvReport>& reports,
                                    const LabelPolicy& policy) {
  std::vector<PayloadLabel> out;
  out.reserve(reports.size());
  for (const auto& r : reports) out.push_back(label_payload(r, policy));
  return out;
}

LabelPolicy policy_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy file: " + path);
  nlohmann::json j;
  in >> j;
  LabelPolicy p;
  p.positive_threshold = j.value("positive_threshold", p.positive_threshold);
  if (p.positive_threshold < 1)
    throw std::invalid_argument("policy: positive_threshold must be >= 1");
  if (j.contains("generic_patterns"))
    p.generic_patterns = j["generic_patterns"].get<std::vector<std::string>>();
  if (j.contains("token_stoplist"))
    p.token_stoplist = j["token_stoplist"].get<std::vector<std::string>>();
  if (j.contains("priority_families"))
    p.priority_families = j["priority_families"].get<std::vector<std::string>>();
  p.min_token_length = j.value("min_token_length", p.min_token_length);
  for (auto& s : p.generic_patterns) s = lower(s);
  for (auto& s : p.token_stoplist) s = lower(s);
  return p;
}

void write_labels(const std::string& path, const std::vector<PayloadLabel>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "#droptrace labels v1\n";
  for (const auto& l : labels) {
    nlohmann::json ev = nlohmann::json::object();
    for (const auto& [fam, count] : l.evidence) ev[fam] = count;
    nlohmann::json j{{"payload_id", l.payload_id},
                     {"malicious", l.malicious},
                     {"family", l.family},
                     {"positives", l.positive_count},
                     {"evidence", ev}};
    out << j.dump() << "\n";
  }
}

std::vector<PayloadLabel> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "#droptrace labels v1")
    throw std::runtime_error(path + ": missing labels schema header");
  std::vector<PayloadLabel> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    PayloadLabel l;
    l.payload_id = j.at("payload_id").get<std::string>();
    l.malicious = j.at("malicious").get<bool>();
    l.family = j.at("family").get<std::string>();
    l.positive_count = j.at("positives").get<int>();
    for (const auto& [fam, count] : j.at("evidence").items())
      l.evidence[fam] = count.get<int>();
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace droptrace
