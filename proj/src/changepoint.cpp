#include "droptrace/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace droptrace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Segment costs over half-open index ranges [a, b), via prefix sums.
class SegmentCost {
 public:
  SegmentCost(const Eigen::VectorXd& x, CostModel model) : model_(model) {
    const int n = int(x.size());
    s1_.resize(n + 1, 0.0);
    s2_.resize(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
      if (model_ == CostModel::Poisson && x[i] < 0.0)
        throw std::domain_error("Poisson cost needs nonnegative counts");
      s1_[i + 1] = s1_[i] + x[i];
      s2_[i + 1] = s2_[i] + x[i] * x[i];
    }
  }

  double operator()(int a, int b) const {
    const double n = b - a;
    const double sum = s1_[b] - s1_[a];
    if (model_ == CostModel::L2) return (s2_[b] - s2_[a]) - sum * sum / n;
    // Poisson NLL up to segmentation-independent terms.
    if (sum <= 0.0) return 0.0;
    return -2.0 * sum * std::log(sum / n);
  }

  double mean(int a, int b) const { return (s1_[b] - s1_[a]) / double(b - a); }

 private:
  CostModel model_;
  std::vector<double> s1_, s2_;
};

void check_input(const Eigen::VectorXd& signal, int min_segment) {
  if (signal.size() < 2) throw std::domain_error("changepoint: signal too short");
  if (min_segment < 1) throw std::domain_error("changepoint: min_segment < 1");
  if (int(signal.size()) < min_segment)
    throw std::domain_error("changepoint: signal shorter than min_segment");
}

ChangepointResult finish(const SegmentCost& cost, std::vector<int> bkps,
                         double penalty) {
  ChangepointResult res;
  res.breakpoints = std::move(bkps);
  res.penalty = penalty;
  int prev = 0;
  for (int b : res.breakpoints) {
    res.segment_means.push_back(cost.mean(prev, b));
    res.cost += cost(prev, b);
    prev = b;
  }
  return res;
}

}  // namespace

ChangepointResult detect_pelt(const Eigen::VectorXd& signal, CostModel cost_model,
                              double penalty, int min_segment) {
  check_input(signal, min_segment);
  if (penalty <= 0.0) throw std::domain_error("detect_pelt: penalty must be positive");
  const int n = int(signal.size());
  const SegmentCost cost(signal, cost_model);

  std::vector<double> f(n + 1, kInf);
  std::vector<int> prev(n + 1, 0);
  f[0] = -penalty;
  // Candidate last-changepoints with a removal deadline. Once
  // f[tau] + cost(tau, t) > f[t] holds at time t, tau cannot be optimal for
  // any t' >= t + min_segment (cost subadditivity), but may still win inside
  // the window (t, t + min_segment) where the path through t is inadmissible,
  // so removal is delayed by min_segment - 1 steps.
  struct Cand {
    int tau;
    int last_usable = std::numeric_limits<int>::max();
  };
  std::vector<Cand> candidates = {{0}};

  for (int t = min_segment; t <= n; ++t) {
    double best = kInf;
    int arg = 0;
    for (const auto& c : candidates) {
      if (t - c.tau < min_segment) continue;
      const double v = f[c.tau] + cost(c.tau, t) + penalty;
      if (v < best) {
        best = v;
        arg = c.tau;
      }
    }
    f[t] = best;
    prev[t] = arg;
    std::vector<Cand> kept;
    for (auto c : candidates) {
      if (t - c.tau >= min_segment &&
          c.last_usable == std::numeric_limits<int>::max() &&
          f[c.tau] + cost(c.tau, t) > f[t])
        c.last_usable = t + min_segment - 1;
      if (c.last_usable > t) kept.push_back(c);
    }
    if (std::isfinite(f[t]) && t + min_segment <= n) kept.push_back({t});
    candidates = std::move(kept);
  }

  std::vector<int> bkps;
  for (int t = n; t > 0; t = prev[t]) bkps.push_back(t);
  std::reverse(bkps.begin(), bkps.end());
  return finish(cost, std::move(bkps), penalty);
}

namespace {

// Best single split of [a, b); returns (gain, split) with leftmost-best
// tie-break, or gain = -inf when no admissible split exists.
std::pair<double, int> best_split(const SegmentCost& cost, int a, int b,
                                  int min_segment) {
  double best_gain = -kInf;
  int best_s = -1;
  const double whole = cost(a, b);
  for (int s = a + min_segment; s + min_segment <= b; ++s) {
    const double gain = whole - cost(a, s) - cost(s, b);
    if (gain > best_gain + 1e-12) {
      best_gain = gain;
      best_s = s;
    }
  }
  return {best_gain, best_s};
}

ChangepointResult binseg_impl(const Eigen::VectorXd& signal, CostModel cost_model,
                              double penalty, int budget, int min_segment) {
  check_input(signal, min_segment);
  const int n = int(signal.size());
  const SegmentCost cost(signal, cost_model);

  std::set<int> bounds = {0, n};
  bool degenerate = false;
  while (budget != 0) {
    double best_gain = -kInf;
    int best_s = -1;
    int prev_b = 0;
    for (auto it = std::next(bounds.begin()); it != bounds.end(); ++it) {
      auto [gain, s] = best_split(cost, prev_b, *it, min_segment);
      if (s >= 0 && gain > best_gain + 1e-12) {
        best_gain = gain;
        best_s = s;
      }
      prev_b = *it;
    }
    if (best_s < 0) break;                          // no admissible split left
    if (budget < 0 && best_gain <= penalty) break;  // penalty-driven stop
    if (best_gain <= 1e-12) degenerate = true;      // forced zero-gain split
    bounds.insert(best_s);
    if (budget > 0) --budget;
  }

  std::vector<int> bkps(std::next(bounds.begin()), bounds.end());
  auto res = finish(cost, std::move(bkps), penalty > 0 ? penalty : 0.0);
  res.degenerate = degenerate;
  return res;
}

}  // namespace

ChangepointResult detect_binseg(const Eigen::VectorXd& signal, CostModel cost_model,
                                double penalty, int min_segment) {
  if (penalty <= 0.0) throw std::domain_error("detect_binseg: penalty must be positive");
  return binseg_impl(signal, cost_model, penalty, -1, min_segment);
}

ChangepointResult detect_binseg_k(const Eigen::VectorXd& signal, CostModel cost_model,
                                  int n_breakpoints, int min_segment) {
  if (n_breakpoints < 0) throw std::domain_error("detect_binseg_k: negative budget");
  if (std::int64_t(n_breakpoints + 1) * min_segment > signal.size())
    throw std::domain_error("detect_binseg_k: budget exceeds signal capacity");
  return binseg_impl(signal, cost_model, 0.0, n_breakpoints, min_segment);
}

double bic_penalty(const Eigen::VectorXd& signal) {
  const int n = int(signal.size());
  if (n < 2) throw std::domain_error("bic_penalty: need at least 2 points");
  // Noise scale from first differences, robust to the mean shifts the
  // detector is meant to find.
  std::vector<double> diffs(n - 1);
  for (int i = 0; i + 1 < n; ++i) diffs[i] = signal[i + 1] - signal[i];
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  const double med = median(diffs);
  std::vector<double> abs_dev(diffs.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) abs_dev[i] = std::abs(diffs[i] - med);
  const double mad = median(abs_dev);
  const double sigma = 1.4826 * mad / std::sqrt(2.0);
  const double pen = sigma * sigma * std::log(double(n));
  // Constant signals give a zero estimate; clamp so the penalty stays usable.
  return std::max(pen, std::numeric_limits<double>::epsilon());
}

DivergenceReport diverging_values(const std::map<std::string, ChangepointResult>& results,
                                  int tolerance, double quorum) {
  if (results.size() < 2)
    throw std::invalid_argument("diverging_values: need at least 2 series");
  DivergenceReport report;
  report.tolerance = tolerance;

  const int quorum_count = int(std::ceil(quorum * double(results.size())));
  std::set<int> positions;
  bool any_nonempty = false;
  for (const auto& [value, res] : results) {
    const auto interior = res.interior();
    any_nonempty |= !interior.empty();
    positions.insert(interior.begin(), interior.end());
  }

  auto has_near = [&](const std::vector<int>& bkps, int p) {
    return std::any_of(bkps.begin(), bkps.end(),
                       [&](int b) { return std::abs(b - p) <= tolerance; });
  };

  for (int p : positions) {
    int support = 0;
    for (const auto& [value, res] : results)
      if (has_near(res.interior(), p)) ++support;
    if (support >= quorum_count) report.common.push_back(p);
  }

  for (const auto& [value, res] : results) {
    const auto interior = res.interior();
    std::vector<int> extra, missing;
    for (int b : interior)
      if (!has_near(report.common, b)) extra.push_back(b);
    for (int c : report.common)
      if (!has_near(interior, c)) missing.push_back(c);
    if (!extra.empty()) report.per_value_extra[value] = std::move(extra);
    if (!missing.empty()) report.per_value_missing[value] = std::move(missing);
    if (interior.empty() && any_nonempty) report.flat_values.push_back(value);
  }
  return report;
}

}  // namespace droptrace
