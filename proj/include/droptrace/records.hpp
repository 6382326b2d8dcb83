#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "droptrace/date.hpp"
#include "droptrace/plan.hpp"

namespace droptrace {

struct PayloadRef {
  std::string payload_id;  // content hash
  std::string media_type;  // "x-dosexec", "html", "plain", ...

  bool executable() const { return media_type == "x-dosexec"; }
};

// One sandboxed downloader run.
struct ExecutionRecord {
  std::string run_id;
  Date date;
  int minute_of_day = 0;
  std::string downloader_family;
  std::string sample_id;
  MachineProfile profile;
  bool detonated = false;
  std::vector<PayloadRef> payloads;
};

struct AvDetection {
  std::string engine;
  std::string label;
};

// VirusTotal-style scan result for one payload.
struct AvReport {
  std::string payload_id;
  Date scanned_at;
  int engine_count = 0;  // engines consulted, including clean ones
  std::vector<AvDetection> detections;
};

// Line-delimited record files. First line is a schema header
// ("#droptrace <kind> v1"), then one JSON object per line.
void write_records(const std::string& path, const std::vector<ExecutionRecord>& recs);
std::vector<ExecutionRecord> read_records(const std::string& path);

void write_reports(const std::string& path, const std::vector<AvReport>& reports);
std::vector<AvReport> read_reports(const std::string& path);

std::string record_to_json_line(const ExecutionRecord& r);
std::string report_to_json_line(const AvReport& r);

// FNV-1a over a file's bytes; manifest/provenance fingerprint.
std::uint64_t hash_file(const std::string& path);
std::string hash_file_hex(const std::string& path);

}  // namespace droptrace
