#include "droptrace/records.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace droptrace {

namespace {

using nlohmann::json;

constexpr char kRecordsHeader[] = "#droptrace runs v1";
constexpr char kReportsHeader[] = "#droptrace av-reports v1";

void expect_header(std::istream& in, const std::string& want, const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || line != want)
    throw std::runtime_error(path + ": missing schema header '" + want + "'");
}

json profile_to_json(const MachineProfile& p) {
  json j = json::object();
  for (const auto& [k, v] : p.assignments) j[k] = v;
  return j;
}

MachineProfile profile_from_json(const json& j) {
  MachineProfile p;
  for (auto it = j.begin(); it != j.end(); ++it)
    p.assignments[it.key()] = it.value().get<std::string>();
  return p;
}

}  // namespace

std::string record_to_json_line(const ExecutionRecord& r) {
  json payloads = json::array();
  for (const auto& p : r.payloads)
    payloads.push_back({{"id", p.payload_id}, {"media", p.media_type}});
  json j{{"run_id", r.run_id},
         {"date", r.date.str()},
         {"minute", r.minute_of_day},
         {"family", r.downloader_family},
         {"sample", r.sample_id},
         {"profile", profile_to_json(r.profile)},
         {"detonated", r.detonated},
         {"payloads", payloads}};
  return j.dump();
}

std::string report_to_json_line(const AvReport& r) {
  json dets = json::array();
  for (const auto& d : r.detections)
    dets.push_back({{"engine", d.engine}, {"label", d.label}});
  json j{{"payload_id", r.payload_id},
         {"scanned_at", r.scanned_at.str()},
         {"engines", r.engine_count},
         {"detections", dets}};
  return j.dump();
}

void write_records(const std::string& path, const std::vector<ExecutionRecord>& recs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kRecordsHeader << "\n";
  for (const auto& r : recs) out << record_to_json_line(r) << "\n";
}

std::vector<ExecutionRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  expect_header(in, kRecordsHeader, path);
  std::vector<ExecutionRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ExecutionRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.date = Date::parse(j.at("date").get<std::string>());
    r.minute_of_day = j.at("minute").get<int>();
    r.downloader_family = j.at("family").get<std::string>();
    r.sample_id = j.at("sample").get<std::string>();
    r.profile = profile_from_json(j.at("profile"));
    r.detonated = j.at("detonated").get<bool>();
    for (const auto& jp : j.at("payloads"))
      r.payloads.push_back({jp.at("id").get<std::string>(),
                            jp.at("media").get<std::string>()});
    out.push_back(std::move(r));
  }
  return out;
}

void write_reports(const std::string& path, const std::vector<AvReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kReportsHeader << "\n";
  for (const auto& r : reports) out << report_to_json_line(r) << "\n";
}

std::vector<AvReport> read_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  expect_header(in, kReportsHeader, path);
  std::vector<AvReport> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    AvReport r;
    r.payload_id = j.at("payload_id").get<std::string>();
    r.scanned_at = Date::parse(j.at("scanned_at").get<std::string>());
    r.engine_count = j.at("engines").get<int>();
    for (const auto& jd : j.at("detections"))
      r.detections.push_back({jd.at("engine").get<std::string>(),
                              jd.at("label").get<std::string>()});
    out.push_back(std::move(r));
  }
  return out;
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= std::uint8_t(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

std::string hash_file_hex(const std::string& path) {
  std::ostringstream os;
  os << std::hex << hash_file(path);
  return os.str();
}

}  // namespace droptrace
