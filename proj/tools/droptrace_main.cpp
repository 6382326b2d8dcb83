#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "droptrace/changepoint.hpp"
#include "droptrace/label.hpp"
#include "droptrace/pipeline.hpp"
#include "droptrace/plan.hpp"
#include "droptrace/records.hpp"
#include "droptrace/series.hpp"
#include "droptrace/sim.hpp"
#include "droptrace/stats.hpp"

namespace {

using namespace droptrace;

Catalog load_catalog(const std::string& path) {
  return path.empty() || path == "default" ? catalog_default()
                                           : catalog_from_json_file(path);
}

int run_plan(const std::string& catalog_path, int d, int s, int t, int p) {
  Catalog catalog = load_catalog(catalog_path);
  auto plan = make_plan(catalog, d, s, t, p);
  std::cout << "# profile matrix (" << plan.profiles.size() << " variations)\n";
  std::cout << "profile";
  for (const auto& f : catalog) std::cout << ',' << f.name;
  std::cout << '\n';
  for (std::size_t i = 0; i < plan.profiles.size(); ++i) {
    std::cout << i;
    for (const auto& f : catalog) std::cout << ',' << plan.profiles[i].at(f.name);
    std::cout << '\n';
  }
  std::cout << "# d=" << d << " s=" << s << " k=" << plan.feature_variations
            << " t=" << t << " p=" << p << "\n";
  std::cout << "# VM budget: " << required_vms(plan) << "\n";
  return 0;
}

int run_simulate(const std::string& scenario_path, const std::string& catalog_path,
                 int samples_per_day, const std::string& out_dir,
                 std::optional<std::uint64_t> seed) {
  Scenario scenario = scenario_from_json_file(scenario_path);
  if (seed) scenario.seed = *seed;
  Catalog catalog = load_catalog(catalog_path);
  auto plan = make_plan(catalog, int(scenario.downloader_families.size()),
                        samples_per_day, 15);
  auto out = simulate(scenario, plan);
  std::filesystem::create_directories(out_dir);
  write_records(out_dir + "/runs.jsonl", out.records);
  write_reports(out_dir + "/reports.jsonl", out.reports);
  truth_to_json_file(out.truth, out_dir + "/truth.json");
  std::cout << out.records.size() << " runs, " << out.reports.size()
            << " payload reports -> " << out_dir << "\n";
  return 0;
}

int run_label(const std::string& reports_path, const std::string& policy_path,
              const std::string& out_path) {
  LabelPolicy policy =
      policy_path.empty() ? LabelPolicy{} : policy_from_json_file(policy_path);
  auto reports = read_reports(reports_path);
  auto labels = label_all(reports, policy);
  write_labels(out_path, labels);
  std::size_t malicious = 0;
  for (const auto& l : labels) malicious += l.malicious;
  std::cout << labels.size() << " payloads labeled, " << malicious << " malicious -> "
            << out_path << "\n";
  return 0;
}

int run_series(const std::string& runs_path, const std::string& labels_path,
               const std::string& catalog_path, const std::string& downloader,
               const std::string& payload, const std::string& feature,
               const std::string& out_prefix) {
  auto runs = read_records(runs_path);
  auto labels = read_labels(labels_path);
  Catalog catalog = load_catalog(catalog_path);
  auto series = build_series(runs, labels, catalog, downloader, payload, feature);
  series_to_json_file(series, out_prefix + ".json");
  series_to_csv_file(series, out_prefix + ".csv");
  binned_to_csv_file(bin_monthly(series), out_prefix + ".binned.csv");
  std::cout << "series -> " << out_prefix << ".{json,csv,binned.csv}\n";
  return 0;
}

int run_changepoints(const std::string& series_path, const std::string& algo,
                     double penalty, bool use_bic, int min_segment, int tolerance,
                     const std::string& out_path) {
  auto series = series_from_json_file(series_path);
  auto binned = bin_monthly(series);

  Date lo, hi;
  bool first = true;
  for (const auto& [value, rows] : series.per_value)
    for (const auto& r : rows) {
      if (first || r.date < lo) lo = r.date;
      if (first || hi < r.date) hi = r.date;
      first = false;
    }
  if (first) throw std::runtime_error("series has no data");
  const auto anchors = bin_anchors({lo, hi});

  std::map<std::string, ChangepointResult> results;
  nlohmann::json j;
  for (const auto& [value, rows] : series.per_value) {
    auto sig = binned_signal(binned, value, anchors);
    if (int(sig.size()) < std::max(2, min_segment)) continue;
    Eigen::VectorXd signal =
        Eigen::Map<const Eigen::VectorXd>(sig.data(), long(sig.size()));
    const double pen = use_bic ? bic_penalty(signal) : penalty;
    auto res = algo == "binseg" ? detect_binseg(signal, CostModel::L2, pen, min_segment)
                                : detect_pelt(signal, CostModel::L2, pen, min_segment);
    res.series_key = value;
    nlohmann::json jr{{"value", value},
                      {"penalty", res.penalty},
                      {"cost", res.cost},
                      {"segment_means", res.segment_means},
                      {"breakpoint_dates", nlohmann::json::array()}};
    for (int b : res.interior()) jr["breakpoint_dates"].push_back(anchors[b].str());
    j["values"].push_back(std::move(jr));
    results[value] = std::move(res);
  }
  if (results.size() >= 2) {
    auto div = diverging_values(results, tolerance);
    j["common_dates"] = nlohmann::json::array();
    for (int c : div.common) j["common_dates"].push_back(anchors[c].str());
    for (const auto& [value, extra] : div.per_value_extra) {
      nlohmann::json dates = nlohmann::json::array();
      for (int e : extra) dates.push_back(anchors[e].str());
      j["extra"][value] = std::move(dates);
    }
    for (const auto& [value, missing] : div.per_value_missing) {
      nlohmann::json dates = nlohmann::json::array();
      for (int m : missing) dates.push_back(anchors[m].str());
      j["missing"][value] = std::move(dates);
    }
    j["flat_values"] = div.flat_values;
  }
  std::ofstream out(out_path);
  out << j.dump(2) << "\n";
  std::cout << "changepoints -> " << out_path << "\n";
  return 0;
}

int run_anova(const std::string& series_path, const std::string& window_spec,
              double alpha, const std::string& correction_name,
              bool brown_forsythe_flag, const std::string& out_path) {
  auto series = series_from_json_file(series_path);
  std::optional<DateInterval> window;
  if (!window_spec.empty()) {
    const auto colon = window_spec.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("--window expects start:end");
    window = DateInterval{Date::parse(window_spec.substr(0, colon)),
                          Date::parse(window_spec.substr(colon + 1))};
  }
  Correction correction = Correction::Holm;
  if (correction_name == "none") correction = Correction::None;
  if (correction_name == "bonferroni") correction = Correction::Bonferroni;

  auto screen = significance_screen(series, window, alpha, correction);
  if (!screen.sufficient) {
    std::cout << "insufficient data: fewer than 2 non-empty groups\n";
    return 0;
  }
  std::cout << "H=" << screen.anova.H << " df=" << screen.anova.degrees_of_freedom
            << " p=" << screen.anova.p_value
            << (screen.anova.exact ? " (exact)" : " (chi-square)") << "\n";
  for (const auto& [value, s] : screen.anova.group_summaries)
    std::cout << "  " << value << ": n=" << s.n << " mean=" << s.mean
              << " sem=" << s.sem << " mean_rank=" << s.mean_rank << "\n";
  for (const auto& f : screen.findings)
    std::cout << "  * " << f.value_a << " " << f.direction << " than " << f.value_b
              << " (adj p=" << f.adjusted_p << ")\n";

  nlohmann::json j{{"H", screen.anova.H},
                   {"df", screen.anova.degrees_of_freedom},
                   {"p", screen.anova.p_value},
                   {"exact", screen.anova.exact}};
  for (const auto& [value, s] : screen.anova.group_summaries)
    j["groups"][value] = {{"n", s.n},
                          {"mean", s.mean},
                          {"sem", std::isnan(s.sem) ? 0.0 : s.sem},
                          {"mean_rank", s.mean_rank}};
  for (const auto& f : screen.findings)
    j["significant_pairs"].push_back({{"value_a", f.value_a},
                                      {"value_b", f.value_b},
                                      {"direction", f.direction},
                                      {"adjusted_p", f.adjusted_p}});
  for (const auto& [k, v] : screen.pretests) j["pretests"][k] = v;

  if (brown_forsythe_flag) {
    std::map<std::string, std::vector<double>> obs;
    for (const auto& row : analysis_window(series, window))
      for (const auto& [value, ratio] : row.ratio_by_value)
        if (ratio) obs[value].push_back(*ratio);
    std::vector<RatioSample> groups;
    for (const auto& [value, v] : obs) {
      if (v.size() < 2) continue;  // variance undefined for singleton groups
      groups.push_back(
          {value, Eigen::Map<const Eigen::VectorXd>(v.data(), long(v.size()))});
    }
    const auto bf = brown_forsythe(groups);
    std::cout << "brown-forsythe F=" << bf.F << " df=(" << bf.df1 << "," << bf.df2
              << ") p=" << bf.p_value << "\n";
    j["brown_forsythe"] = {
        {"F", bf.F}, {"df1", bf.df1}, {"df2", bf.df2}, {"p", bf.p_value}};
  }

  std::ofstream out(out_path);
  out << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"black-box analysis of downloader targeting profiles"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "override the scenario seed");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "profile matrix and VM budget");
  std::string plan_catalog = "default";
  int plan_d = 2, plan_s = 10, plan_t = 15, plan_p = 1440;
  plan_cmd->add_option("--catalog", plan_catalog, "catalog JSON file or 'default'");
  plan_cmd->add_option("--d", plan_d, "downloader families");
  plan_cmd->add_option("--s", plan_s, "samples per family per day");
  plan_cmd->add_option("--t", plan_t, "minutes per run");
  plan_cmd->add_option("--p", plan_p, "minutes per day");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic campaign");
  std::string sim_scenario, sim_out = "out", sim_catalog = "default";
  int sim_samples = 10;
  sim_cmd->add_option("--scenario", sim_scenario, "scenario JSON")->required();
  sim_cmd->add_option("--catalog", sim_catalog, "catalog JSON file or 'default'");
  sim_cmd->add_option("--samples-per-day", sim_samples, "sample budget per family");
  sim_cmd->add_option("--out", sim_out, "output directory");

  // label
  auto* label_cmd = app.add_subcommand("label", "label payloads from AV reports");
  std::string label_reports, label_policy, label_out = "labels.jsonl";
  label_cmd->add_option("--reports", label_reports, "AV report JSONL")->required();
  label_cmd->add_option("--policy", label_policy, "label policy JSON");
  label_cmd->add_option("--out", label_out, "output labels JSONL");

  // series
  auto* series_cmd = app.add_subcommand("series", "build infection time series");
  std::string ser_runs, ser_labels, ser_catalog = "default", ser_downloader,
              ser_payload, ser_feature, ser_out = "series";
  series_cmd->add_option("--runs", ser_runs, "runs JSONL")->required();
  series_cmd->add_option("--labels", ser_labels, "labels JSONL")->required();
  series_cmd->add_option("--catalog", ser_catalog, "catalog JSON file or 'default'");
  series_cmd->add_option("--downloader", ser_downloader, "downloader family")->required();
  series_cmd->add_option("--payload", ser_payload, "payload family")->required();
  series_cmd->add_option("--feature", ser_feature, "feature name")->required();
  series_cmd->add_option("--out", ser_out, "output path prefix");

  // changepoints
  auto* cp_cmd = app.add_subcommand("changepoints", "offline changepoint detection");
  std::string cp_series, cp_algo = "pelt", cp_out = "changepoints.json";
  double cp_penalty = 0.0;
  bool cp_bic = false;
  int cp_minseg = 2, cp_tol = 1;
  cp_cmd->add_option("--series", cp_series, "series JSON")->required();
  cp_cmd->add_option("--algo", cp_algo, "pelt|binseg")
      ->check(CLI::IsMember({"pelt", "binseg"}));
  cp_cmd->add_option("--penalty", cp_penalty, "fixed penalty");
  cp_cmd->add_flag("--bic", cp_bic, "derive penalty from the signal");
  cp_cmd->add_option("--min-seg", cp_minseg, "minimum segment length in bins");
  cp_cmd->add_option("--tolerance", cp_tol, "cross-value matching tolerance in bins");
  cp_cmd->add_option("--out", cp_out, "output JSON");

  // anova
  auto* anova_cmd = app.add_subcommand("anova", "rank ANOVA on daily ratios");
  std::string an_series, an_window, an_correction = "holm", an_out = "anova.json";
  double an_alpha = 0.05;
  anova_cmd->add_option("--series", an_series, "series JSON")->required();
  anova_cmd->add_option("--window", an_window, "start:end dates");
  anova_cmd->add_option("--alpha", an_alpha, "significance threshold");
  anova_cmd->add_option("--correction", an_correction, "none|bonferroni|holm")
      ->check(CLI::IsMember({"none", "bonferroni", "holm"}));
  bool an_bf = false;
  anova_cmd->add_flag("--brown-forsythe", an_bf,
                      "also run the variance-equality pre-test");
  anova_cmd->add_option("--out", an_out, "output JSON");

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "run the full replayable pipeline");
  std::string pipe_config, pipe_out = "out";
  pipe_cmd->add_option("--config", pipe_config, "pipeline config JSON")->required();
  pipe_cmd->add_option("--out-dir", pipe_out, "output directory");

  // report
  auto* rep_cmd = app.add_subcommand("report", "render findings");
  std::string rep_findings, rep_format = "table";
  rep_cmd->add_option("--findings", rep_findings, "findings JSONL")->required();
  rep_cmd->add_option("--format", rep_format, "table|csv|plotdata")
      ->check(CLI::IsMember({"table", "csv", "plotdata"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan_cmd->parsed())
      return run_plan(plan_catalog, plan_d, plan_s, plan_t, plan_p);
    if (sim_cmd->parsed())
      return run_simulate(sim_scenario, sim_catalog, sim_samples, sim_out, seed);
    if (label_cmd->parsed()) return run_label(label_reports, label_policy, label_out);
    if (series_cmd->parsed())
      return run_series(ser_runs, ser_labels, ser_catalog, ser_downloader, ser_payload,
                        ser_feature, ser_out);
    if (cp_cmd->parsed())
      return run_changepoints(cp_series, cp_algo, cp_penalty, cp_bic || cp_penalty <= 0,
                              cp_minseg, cp_tol, cp_out);
    if (anova_cmd->parsed())
      return run_anova(an_series, an_window, an_alpha, an_correction, an_bf, an_out);
    if (pipe_cmd->parsed()) return cmd_pipeline(pipe_config, pipe_out, seed, std::cout);
    if (rep_cmd->parsed()) {
      ReportFormat fmt = ReportFormat::Table;
      if (rep_format == "csv") fmt = ReportFormat::Csv;
      if (rep_format == "plotdata") fmt = ReportFormat::PlotData;
      return cmd_report(rep_findings, fmt, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
