#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace droptrace {

enum class CostModel { L2, Poisson };

struct ChangepointResult {
  std::string series_key;
  // End-exclusive segment boundaries; strictly increasing, last == n.
  std::vector<int> breakpoints;
  std::vector<double> segment_means;
  double cost = 0.0;     // sum of segment costs at the optimum
  double penalty = 0.0;
  bool degenerate = false;  // a forced split with zero cost gain

  std::vector<int> interior() const {
    return {breakpoints.begin(),
            breakpoints.empty() ? breakpoints.end() : breakpoints.end() - 1};
  }
};

// Exact minimizer of sum(segment costs) + penalty * (#segments - 1) by
// pruned dynamic programming. Signal length must be >= 2, penalty > 0.
ChangepointResult detect_pelt(const Eigen::VectorXd& signal, CostModel cost_model,
                              double penalty, int min_segment = 2);

// Greedy recursive splitting, leftmost-best tie-break. Stops when the best
// split gains less than `penalty`.
ChangepointResult detect_binseg(const Eigen::VectorXd& signal, CostModel cost_model,
                                double penalty, int min_segment = 2);

// Same, but with a fixed breakpoint budget. A forced zero-gain split marks
// the result degenerate.
ChangepointResult detect_binseg_k(const Eigen::VectorXd& signal, CostModel cost_model,
                                  int n_breakpoints, int min_segment = 2);

// sigma_hat^2 * log(n), with sigma_hat from the median absolute deviation
// of first differences. Clamped to an epsilon floor for constant signals.
double bic_penalty(const Eigen::VectorXd& signal);

struct DivergenceReport {
  std::vector<int> common;  // bin indices shared by >= quorum of the values
  std::map<std::string, std::vector<int>> per_value_extra;
  std::map<std::string, std::vector<int>> per_value_missing;
  // Values with no breakpoints at all while others have some
  // (the "no changepoints identified" case).
  std::vector<std::string> flat_values;
  int tolerance = 1;
};

DivergenceReport diverging_values(const std::map<std::string, ChangepointResult>& results,
                                  int tolerance = 1, double quorum = 2.0 / 3.0);

}  // namespace droptrace
