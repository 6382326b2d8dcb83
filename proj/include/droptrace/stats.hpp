#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "droptrace/date.hpp"
#include "droptrace/series.hpp"

namespace droptrace {

struct insufficient_n : std::domain_error {
  using std::domain_error::domain_error;
};

struct GroupSummary {
  int n = 0;
  double mean = 0.0;
  double sem = 0.0;  // NaN when n == 1
  double mean_rank = 0.0;
};

struct RatioSample {
  std::string value;
  Eigen::VectorXd observations;
};

struct AnovaResult {
  double H = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  bool exact = false;  // permutation p (small N) instead of chi-square
  std::map<std::string, GroupSummary> group_summaries;
  std::map<std::pair<std::string, std::string>, double> pairwise;  // adjusted p
};

enum class Correction { None, Bonferroni, Holm };

// Upper-tail helpers used across the battery.
double normal_sf(double z);           // P(Z > z), Z ~ N(0,1)
double normal_quantile(double p);     // inverse CDF
double chi_squared_sf(double x, double df);

// Royston's AS R94 approximation. 3 <= n <= 5000, non-constant sample.
std::pair<double, double> shapiro_wilk(const Eigen::VectorXd& sample);

// D = sup |ECDF_a - ECDF_b|; p from the asymptotic Kolmogorov distribution
// with the small-sample effective-n correction.
std::pair<double, double> ks_two_sample(const Eigen::VectorXd& a,
                                        const Eigen::VectorXd& b);

// One-way ANOVA on ranks with mid-rank ties and tie correction. Exact
// permutation p for total N <= 12, chi-square otherwise.
AnovaResult kruskal_wallis(const std::vector<RatioSample>& groups);

// Median-centered Levene test of variance equality; an optional alternative
// to the KS pre-test, which checks distribution equality rather than
// homoscedasticity.
struct BrownForsytheResult {
  double F = 0.0;
  int df1 = 0, df2 = 0;
  double p_value = 1.0;
};
BrownForsytheResult brown_forsythe(const std::vector<RatioSample>& groups);

// Dunn's rank-based pairwise z tests after a significant omnibus result.
std::map<std::pair<std::string, std::string>, double> dunn_posthoc(
    const std::vector<RatioSample>& groups, Correction correction = Correction::Holm);

// (mean, sd/sqrt(n)). Throws domain_error on empty, insufficient_n on n == 1.
std::pair<double, double> mean_sem(const Eigen::VectorXd& sample);

struct ScreenFinding {
  std::string value_a, value_b;
  std::string direction;  // value_a "higher" or "lower" than value_b
  double z = 0.0;
  double adjusted_p = 1.0;
  double mean_a = 0.0, sem_a = 0.0;
  double mean_b = 0.0, sem_b = 0.0;
};

struct ScreenResult {
  bool sufficient = true;
  AnovaResult anova;
  std::vector<ScreenFinding> findings;  // pairs with adjusted p < alpha
  // Advisory pre-tests (normality / distribution equality).
  std::map<std::string, double> pretests;
};

// analysis_window -> kruskal_wallis -> (if omnibus p < alpha) dunn_posthoc.
ScreenResult significance_screen(const InfectionSeries& series,
                                 std::optional<DateInterval> window, double alpha = 0.05,
                                 Correction correction = Correction::Holm);

}  // namespace droptrace
