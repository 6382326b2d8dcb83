#include "droptrace/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "droptrace/changepoint.hpp"
#include "droptrace/label.hpp"
#include "droptrace/plan.hpp"
#include "droptrace/records.hpp"
#include "droptrace/series.hpp"
#include "droptrace/sim.hpp"
#include "droptrace/stats.hpp"

namespace droptrace {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json finding_to_json(const AnalysisFinding& f) {
  json prov = json::object();
  for (const auto& [k, v] : f.provenance) prov[k] = v;
  return json{{"downloader", f.downloader_family},
              {"payload_family", f.payload_family},
              {"feature", f.feature},
              {"kind", f.kind},
              {"value_a", f.value_a},
              {"value_b", f.value_b},
              {"direction", f.direction},
              {"statistic", f.statistic},
              {"adjusted_p", f.adjusted_p},
              {"mean_a", f.mean_a},
              {"sem_a", f.sem_a},
              {"mean_b", f.mean_b},
              {"sem_b", f.sem_b},
              {"detail", f.detail},
              {"window_start", f.window_start},
              {"window_end", f.window_end},
              {"provenance", prov}};
}

AnalysisFinding finding_from_json(const json& j) {
  AnalysisFinding f;
  f.downloader_family = j.at("downloader").get<std::string>();
  f.payload_family = j.at("payload_family").get<std::string>();
  f.feature = j.at("feature").get<std::string>();
  f.kind = j.at("kind").get<std::string>();
  f.value_a = j.at("value_a").get<std::string>();
  f.value_b = j.at("value_b").get<std::string>();
  f.direction = j.at("direction").get<std::string>();
  f.statistic = j.at("statistic").get<double>();
  f.adjusted_p = j.at("adjusted_p").get<double>();
  f.mean_a = j.at("mean_a").get<double>();
  f.sem_a = j.at("sem_a").get<double>();
  f.mean_b = j.at("mean_b").get<double>();
  f.sem_b = j.at("sem_b").get<double>();
  f.detail = j.at("detail").get<std::string>();
  f.window_start = j.at("window_start").get<std::string>();
  f.window_end = j.at("window_end").get<std::string>();
  for (const auto& [k, v] : j.at("provenance").items())
    f.provenance[k] = v.get<std::string>();
  return f;
}

std::string join_dates(const std::vector<int>& indices, const std::vector<Date>& anchors) {
  std::string out;
  for (int i : indices) {
    if (!out.empty()) out += " ";
    out += (i >= 0 && i < int(anchors.size())) ? anchors[i].str() : std::to_string(i);
  }
  return out;
}

}  // namespace

void manifest_to_json_file(const RunManifest& m, const std::string& path) {
  json j{{"tool_version", m.tool_version},
         {"seed", m.seed},
         {"config_path", m.config_path},
         {"config_hash", m.config_hash}};
  j["stages"] = json::array();
  for (const auto& s : m.stages)
    j["stages"].push_back({{"name", s.name},
                           {"inputs", s.inputs},
                           {"outputs", s.outputs},
                           {"status", s.status}});
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

void write_findings(const std::string& path, const std::vector<AnalysisFinding>& findings) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "#droptrace findings v1\n";
  for (const auto& f : findings) out << finding_to_json(f).dump() << "\n";
}

std::vector<AnalysisFinding> read_findings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "#droptrace findings v1")
    throw std::runtime_error(path + ": missing findings schema header");
  std::vector<AnalysisFinding> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(finding_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": parse error: " + e.what());
    }
  }
  return out;
}

int cmd_pipeline(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override, std::ostream& log) {
  fs::create_directories(out_dir);
  auto in_out = [&](const std::string& name) { return out_dir + "/" + name; };

  RunManifest manifest;
  manifest.config_path = config_path;
  manifest.config_hash = hash_file_hex(config_path);

  std::ifstream cfg_in(config_path);
  if (!cfg_in) throw std::runtime_error("cannot open config: " + config_path);
  json cfg;
  cfg_in >> cfg;

  // Paths inside the config resolve relative to the config file itself.
  const fs::path cfg_dir = fs::path(config_path).parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path fp(p);
    if (fp.is_absolute() || fs::exists(fp)) return p;
    return (cfg_dir / fp).string();
  };

  std::string current_stage = "plan";
  try {
    // --- plan ---
    Catalog catalog;
    const std::string catalog_spec = cfg.value("catalog", std::string("default"));
    catalog = catalog_spec == "default" ? catalog_default()
                                        : catalog_from_json_file(resolve(catalog_spec));
    catalog_to_json_file(catalog, in_out("catalog.json"));

    manifest.stages.push_back({"plan",
                               {config_path},
                               {in_out("catalog.json")}});

    // --- simulate ---
    current_stage = "simulate";
    const auto& jplan = cfg.at("plan");
    const std::string scenario_path = resolve(cfg.at("scenario").get<std::string>());
    Scenario scenario = scenario_from_json_file(scenario_path);
    if (seed_override) scenario.seed = *seed_override;
    if (cfg.contains("seed") && !seed_override) scenario.seed = cfg["seed"].get<std::uint64_t>();
    manifest.seed = scenario.seed;

    ExperimentPlan plan = make_plan(catalog, int(scenario.downloader_families.size()),
                                    jplan.value("samples_per_day", 10),
                                    jplan.value("run_minutes", 15),
                                    jplan.value("day_minutes", 1440));
    log << "[plan] " << plan.profiles.size() << " profiles, VM budget "
        << required_vms(plan) << "\n";
    SimOutput sim = simulate(scenario, plan);
    write_records(in_out("runs.jsonl"), sim.records);
    write_reports(in_out("reports.jsonl"), sim.reports);
    truth_to_json_file(sim.truth, in_out("truth.json"));
    log << "[simulate] " << sim.records.size() << " runs, " << sim.reports.size()
        << " payload reports\n";
    manifest.stages.push_back({"simulate",
                               {scenario_path},
                               {in_out("runs.jsonl"), in_out("reports.jsonl"),
                                in_out("truth.json")}});

    // --- label ---
    current_stage = "label";
    LabelPolicy policy;
    if (cfg.contains("label_policy"))
      policy = policy_from_json_file(resolve(cfg["label_policy"].get<std::string>()));
    const auto labels = label_all(sim.reports, policy);
    write_labels(in_out("labels.jsonl"), labels);
    std::size_t malicious = 0;
    for (const auto& l : labels) malicious += l.malicious;
    log << "[label] " << labels.size() << " payloads, " << malicious << " malicious\n";
    manifest.stages.push_back({"label",
                               {in_out("reports.jsonl")},
                               {in_out("labels.jsonl")}});

    // --- analyses ---
    std::vector<AnalysisFinding> findings;
    const std::string runs_hash = hash_file_hex(in_out("runs.jsonl"));
    const std::string labels_hash = hash_file_hex(in_out("labels.jsonl"));

    int idx = 0;
    for (const auto& ja : cfg.value("analyses", json::array())) {
      const std::string tag = std::to_string(idx++);
      const std::string downloader = ja.at("downloader").get<std::string>();
      const std::string payload_family = ja.at("payload_family").get<std::string>();
      const std::string feature = ja.at("feature").get<std::string>();

      std::optional<DateInterval> window;
      if (ja.contains("window"))
        window = DateInterval{Date::parse(ja["window"].at("start").get<std::string>()),
                              Date::parse(ja["window"].at("end").get<std::string>())};
      const DateInterval span = window.value_or(scenario.date_range);

      current_stage = "series[" + tag + "]";
      InfectionSeries series = build_series(sim.records, labels, catalog, downloader,
                                            payload_family, feature);
      series_to_json_file(series, in_out("series_" + tag + ".json"));
      series_to_csv_file(series, in_out("series_" + tag + ".csv"));
      BinnedSeries binned = bin_monthly(series);
      binned_to_csv_file(binned, in_out("binned_" + tag + ".csv"));
      manifest.stages.push_back({"series[" + tag + "]",
                                 {in_out("runs.jsonl"), in_out("labels.jsonl")},
                                 {in_out("series_" + tag + ".json"),
                                  in_out("series_" + tag + ".csv"),
                                  in_out("binned_" + tag + ".csv")}});

      // --- changepoints ---
      current_stage = "changepoints[" + tag + "]";
      const auto jcp = ja.value("changepoint", json::object());
      const int min_segment = jcp.value("min_segment", 2);
      const int tolerance = jcp.value("tolerance", 1);
      const std::string algo = jcp.value("algo", std::string("pelt"));
      const auto anchors = bin_anchors(span);

      std::map<std::string, ChangepointResult> cps;
      json jcp_out;
      for (const auto& [value, rows] : series.per_value) {
        Eigen::VectorXd signal = Eigen::Map<const Eigen::VectorXd>(
            binned_signal(binned, value, anchors).data(), long(anchors.size()));
        if (signal.size() < std::max(2, min_segment)) continue;
        double penalty = jcp.contains("penalty") && jcp["penalty"].is_number()
                             ? jcp["penalty"].get<double>()
                             : bic_penalty(signal);
        ChangepointResult res =
            algo == "binseg" ? detect_binseg(signal, CostModel::L2, penalty, min_segment)
                             : detect_pelt(signal, CostModel::L2, penalty, min_segment);
        res.series_key = value;
        json jr{{"value", value},
                {"penalty", res.penalty},
                {"cost", res.cost},
                {"breakpoint_dates", json::array()},
                {"segment_means", res.segment_means}};
        for (int b : res.interior()) jr["breakpoint_dates"].push_back(anchors[b].str());
        jcp_out["values"].push_back(std::move(jr));
        cps[value] = std::move(res);
      }

      DivergenceReport divergence;
      if (cps.size() >= 2) {
        divergence = diverging_values(cps, tolerance);
        jcp_out["common_dates"] = json::array();
        for (int c : divergence.common)
          jcp_out["common_dates"].push_back(anchors[c].str());
        for (const auto& [value, extra] : divergence.per_value_extra) {
          AnalysisFinding f;
          f.downloader_family = downloader;
          f.payload_family = payload_family;
          f.feature = feature;
          f.kind = "changepoint-divergence";
          f.value_a = value;
          f.direction = "extra";
          f.detail = "extra changepoints: " + join_dates(extra, anchors);
          f.window_start = span.start.str();
          f.window_end = span.end.str();
          f.provenance = {{"runs", runs_hash}, {"labels", labels_hash},
                          {"algo", algo}};
          findings.push_back(std::move(f));
        }
        for (const auto& value : divergence.flat_values) {
          AnalysisFinding f;
          f.downloader_family = downloader;
          f.payload_family = payload_family;
          f.feature = feature;
          f.kind = "changepoint-divergence";
          f.value_a = value;
          f.direction = "flat";
          f.detail = "no changepoints while other values have them";
          f.window_start = span.start.str();
          f.window_end = span.end.str();
          f.provenance = {{"runs", runs_hash}, {"labels", labels_hash},
                          {"algo", algo}};
          findings.push_back(std::move(f));
        }
      }
      {
        std::ofstream out(in_out("changepoints_" + tag + ".json"));
        out << jcp_out.dump(2) << "\n";
      }
      manifest.stages.push_back({"changepoints[" + tag + "]",
                                 {in_out("series_" + tag + ".json")},
                                 {in_out("changepoints_" + tag + ".json")}});

      // --- anova ---
      current_stage = "anova[" + tag + "]";
      const double alpha = ja.value("alpha", 0.05);
      ScreenResult screen = significance_screen(series, window, alpha);
      std::vector<std::string> anova_outputs;
      if (!screen.sufficient) {
        AnalysisFinding f;
        f.downloader_family = downloader;
        f.payload_family = payload_family;
        f.feature = feature;
        f.kind = "insufficient-data";
        f.detail = "fewer than 2 non-empty groups";
        f.window_start = span.start.str();
        f.window_end = span.end.str();
        findings.push_back(std::move(f));
      } else {
        for (const auto& sf : screen.findings) {
          AnalysisFinding f;
          f.downloader_family = downloader;
          f.payload_family = payload_family;
          f.feature = feature;
          f.kind = "significance";
          f.value_a = sf.value_a;
          f.value_b = sf.value_b;
          f.direction = sf.direction;
          f.statistic = screen.anova.H;
          f.adjusted_p = sf.adjusted_p;
          f.mean_a = sf.mean_a;
          f.sem_a = sf.sem_a;
          f.mean_b = sf.mean_b;
          f.sem_b = sf.sem_b;
          f.window_start = span.start.str();
          f.window_end = span.end.str();
          f.provenance = {{"runs", runs_hash},
                          {"labels", labels_hash},
                          {"omnibus_p", std::to_string(screen.anova.p_value)}};
          for (const auto& [k, v] : screen.pretests)
            f.provenance["pretest_" + k] = std::to_string(v);
          findings.push_back(std::move(f));
        }
        // mean+SEM bar plot data
        std::ofstream bars(in_out("bars_" + tag + ".csv"));
        bars << "value,mean,sem\n";
        for (const auto& [value, s] : screen.anova.group_summaries)
          bars << value << ',' << s.mean << ',' << (std::isnan(s.sem) ? 0.0 : s.sem)
               << '\n';
        anova_outputs.push_back(in_out("bars_" + tag + ".csv"));
      }
      manifest.stages.push_back({"anova[" + tag + "]",
                                 {in_out("series_" + tag + ".json")},
                                 anova_outputs});
    }

    current_stage = "findings";
    write_findings(in_out("findings.jsonl"), findings);
    manifest.stages.push_back({"findings", {}, {in_out("findings.jsonl")}});
    manifest_to_json_file(manifest, in_out("manifest.json"));
    log << "[done] " << findings.size() << " findings -> " << in_out("findings.jsonl")
        << "\n";
    return 0;
  } catch (const std::exception& e) {
    manifest.stages.push_back({current_stage, {}, {}, std::string("failed: ") + e.what()});
    manifest_to_json_file(manifest, in_out("manifest.json"));
    log << "[error] stage " << current_stage << ": " << e.what() << "\n";
    return 1;
  }
}

int cmd_report(const std::string& findings_path, ReportFormat format,
               std::ostream& out) {
  const auto findings = read_findings(findings_path);
  switch (format) {
    case ReportFormat::Table: {
      if (findings.empty()) {
        out << "no significant differences\n";
        return 0;
      }
      out << std::left << std::setw(12) << "downloader" << std::setw(14) << "payload"
          << std::setw(18) << "feature" << std::setw(26) << "kind" << std::setw(15)
          << "value_a" << std::setw(15) << "value_b" << std::setw(9) << "dir"
          << std::setw(12) << "adj_p" << "sig\n";
      for (const auto& f : findings) {
        std::ostringstream p;
        p << std::setprecision(4) << f.adjusted_p;
        out << std::left << std::setw(12) << f.downloader_family << std::setw(14)
            << f.payload_family << std::setw(18) << f.feature << std::setw(26) << f.kind
            << std::setw(15) << f.value_a << std::setw(15) << f.value_b << std::setw(9)
            << f.direction << std::setw(12)
            << (f.kind == "significance" ? p.str() : std::string("-"))
            << (f.kind == "significance" && f.adjusted_p < 0.05 ? "*" : "") << "\n";
      }
      return 0;
    }
    case ReportFormat::Csv: {
      out << "downloader,payload_family,feature,kind,value_a,value_b,direction,"
             "statistic,adjusted_p,mean_a,sem_a,mean_b,sem_b,detail\n";
      for (const auto& f : findings)
        out << f.downloader_family << ',' << f.payload_family << ',' << f.feature << ','
            << f.kind << ',' << f.value_a << ',' << f.value_b << ',' << f.direction
            << ',' << f.statistic << ',' << f.adjusted_p << ',' << f.mean_a << ','
            << f.sem_a << ',' << f.mean_b << ',' << f.sem_b << ",\"" << f.detail
            << "\"\n";
      return 0;
    }
    case ReportFormat::PlotData: {
      // (x, y, err) triples for mean+SEM bar charts
      out << "value,mean,sem\n";
      for (const auto& f : findings) {
        if (f.kind != "significance") continue;
        out << f.value_a << ',' << f.mean_a << ',' << f.sem_a << '\n';
        out << f.value_b << ',' << f.mean_b << ',' << f.sem_b << '\n';
      }
      return 0;
    }
  }
  return 2;
}

}  // namespace droptrace
