#include "droptrace/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace droptrace {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double poly(const double* c, int n, double x) {
  // c[0] + c[1] x + ... + c[n-1] x^(n-1)
  double v = 0.0;
  for (int i = n - 1; i >= 0; --i) v = v * x + c[i];
  return v;
}

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) return kNan;
  if (x == 0.0) return 1.0;
  const double lga = std::lgamma(a);
  if (x < a + 1.0) {
    // series for P(a, x)
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lga);
  }
  // continued fraction for Q(a, x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lga) * h;
}

std::vector<double> sorted(const Eigen::VectorXd& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

// Mid-ranks (1-based) of the pooled sample.
std::vector<double> midranks(const std::vector<double>& pooled_sorted_values,
                             const std::vector<double>& values) {
  std::vector<double> rank_of(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto lo = std::lower_bound(pooled_sorted_values.begin(),
                                     pooled_sorted_values.end(), values[i]);
    const auto hi = std::upper_bound(lo, pooled_sorted_values.end(), values[i]);
    const double first = double(lo - pooled_sorted_values.begin()) + 1.0;
    const double last = double(hi - pooled_sorted_values.begin());
    rank_of[i] = 0.5 * (first + last);
  }
  return rank_of;
}

double tie_sum(const std::vector<double>& pooled_sorted) {
  double s = 0.0;
  std::size_t i = 0;
  while (i < pooled_sorted.size()) {
    std::size_t j = i;
    while (j < pooled_sorted.size() && pooled_sorted[j] == pooled_sorted[i]) ++j;
    const double t = double(j - i);
    s += t * t * t - t;
    i = j;
  }
  return s;
}

double h_from_rank_sums(const std::vector<double>& rank_sums,
                        const std::vector<int>& sizes, double big_n) {
  double s = 0.0;
  for (std::size_t g = 0; g < sizes.size(); ++g)
    s += rank_sums[g] * rank_sums[g] / double(sizes[g]);
  return 12.0 / (big_n * (big_n + 1.0)) * s - 3.0 * (big_n + 1.0);
}

// Exhaustive permutation distribution of H over assignments of the pooled
// rank multiset to groups of the observed sizes.
struct ExactCounter {
  const std::vector<double>& ranks;
  const std::vector<int>& sizes;
  double big_n;
  double h_threshold;
  double tie_correction;
  std::uint64_t total = 0;
  std::uint64_t at_least = 0;

  std::vector<bool> used;
  std::vector<double> rank_sums;

  void run() {
    used.assign(ranks.size(), false);
    rank_sums.assign(sizes.size(), 0.0);
    recurse(0, 0, 0);
  }

  void recurse(std::size_t group, int filled, std::size_t min_idx) {
    if (group == sizes.size()) {
      ++total;
      double h = h_from_rank_sums(rank_sums, sizes, big_n);
      if (tie_correction > 0.0) h /= tie_correction;
      if (h >= h_threshold - 1e-9) ++at_least;
      return;
    }
    if (filled == sizes[group]) {
      recurse(group + 1, 0, 0);
      return;
    }
    for (std::size_t i = min_idx; i < ranks.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      rank_sums[group] += ranks[i];
      recurse(group, filled + 1, i + 1);
      rank_sums[group] -= ranks[i];
      used[i] = false;
    }
  }
};

std::uint64_t multinomial(const std::vector<int>& sizes) {
  std::uint64_t total = 0;
  for (int s : sizes) total += std::uint64_t(s);
  std::uint64_t result = 1;
  std::uint64_t n = 1;
  for (int s : sizes)
    for (int i = 1; i <= s; ++i) {
      result = result * n / std::uint64_t(i);
      ++n;
    }
  return result;
}

double holm_adjust(std::vector<std::pair<double, std::size_t>>& indexed,
                   std::vector<double>& adjusted) {
  std::sort(indexed.begin(), indexed.end());
  const std::size_t k = indexed.size();
  double running = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double adj = std::min(1.0, double(k - i) * indexed[i].first);
    running = std::max(running, adj);
    adjusted[indexed[i].second] = running;
  }
  return running;
}

}  // namespace

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0)
    throw std::domain_error("normal_quantile: p outside (0,1)");
  // Acklam's rational approximation plus one Halley refinement.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double chi_squared_sf(double x, double df) {
  if (df <= 0.0) throw std::domain_error("chi_squared_sf: df must be positive");
  if (x <= 0.0) return 1.0;
  return gamma_q(df / 2.0, x / 2.0);
}

std::pair<double, double> shapiro_wilk(const Eigen::VectorXd& sample) {
  const int n = int(sample.size());
  if (n < 3 || n > 5000)
    throw std::domain_error("shapiro_wilk: n must be within [3, 5000]");
  std::vector<double> x = sorted(sample);
  if (x.front() == x.back())
    throw std::domain_error("shapiro_wilk: zero-variance sample");

  const int nn2 = n / 2;
  std::vector<double> weight(nn2 + 1, 0.0);  // 1-based

  if (n == 3) {
    weight[1] = std::sqrt(0.5);
  } else {
    const double an = n;
    std::vector<double> m(nn2 + 1, 0.0);
    double summ2 = 0.0;
    for (int i = 1; i <= nn2; ++i) {
      m[i] = normal_quantile((double(i) - 0.375) / (an + 0.25));
      summ2 += 2.0 * m[i] * m[i];
    }
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    static const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    const double a1 = poly(c1, 6, rsn) - m[1] / ssumm2;
    int i1;
    double fac;
    if (n > 5) {
      i1 = 3;
      const double a2 = -m[2] / ssumm2 + poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      weight[1] = a1;
      weight[2] = a2;
    } else {
      i1 = 2;
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
      weight[1] = a1;
    }
    for (int i = i1; i <= nn2; ++i) weight[i] = -m[i] / fac;
  }

  // W: squared correlation between order statistics and coefficients.
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ssq = 0.0, sax = 0.0;
  for (int i = 0; i < n; ++i) {
    ssq += (x[i] - mean) * (x[i] - mean);
    const int j = n - 1 - i;
    if (i < j)
      sax -= weight[i + 1] * x[i];
    else if (i > j)
      sax += weight[j + 1] * x[i];
  }
  double w = sax * sax / ssq;
  w = std::min(w, 1.0);

  double pw;
  if (n == 3) {
    const double pi6 = 1.90985931710274;
    const double stqr = 1.04719755119660;
    pw = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
  } else {
    const double y = std::log(1.0 - w);
    const double an = n;
    double mu, sigma;
    if (n <= 11) {
      static const double g[2] = {-2.273, 0.459};
      static const double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
      static const double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
      const double gamma = poly(g, 2, an);
      if (y >= gamma) return {w, 1e-99};
      const double yy = -std::log(gamma - y);
      mu = poly(c3, 4, an);
      sigma = std::exp(poly(c4, 4, an));
      pw = normal_sf((yy - mu) / sigma);
    } else {
      const double xx = std::log(an);
      static const double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
      static const double c6[3] = {-0.4803, -0.082676, 0.0030302};
      mu = poly(c5, 4, xx);
      sigma = std::exp(poly(c6, 3, xx));
      pw = normal_sf((y - mu) / sigma);
    }
  }
  return {w, pw};
}

std::pair<double, double> ks_two_sample(const Eigen::VectorXd& a,
                                        const Eigen::VectorXd& b) {
  if (a.size() == 0 || b.size() == 0)
    throw std::domain_error("ks_two_sample: empty sample");
  std::vector<double> xa = sorted(a), xb = sorted(b);
  const double na = double(xa.size()), nb = double(xb.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xa.size() && j < xb.size()) {
    const double v = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] <= v) ++i;
    while (j < xb.size() && xb[j] <= v) ++j;
    d = std::max(d, std::abs(double(i) / na - double(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  if (lambda < 1e-8) {
    p = 1.0;
  } else {
    for (int k = 1; k <= 100; ++k) {
      const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) *
                          std::exp(-2.0 * double(k) * double(k) * lambda * lambda);
      p += term;
      if (std::abs(term) < 1e-12) break;
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  return {d, p};
}

AnovaResult kruskal_wallis(const std::vector<RatioSample>& groups) {
  if (groups.size() < 2)
    throw std::domain_error("kruskal_wallis: need at least 2 groups");
  std::vector<double> pooled;
  std::vector<int> sizes;
  for (const auto& g : groups) {
    if (g.observations.size() == 0)
      throw std::domain_error("kruskal_wallis: empty group " + g.value);
    sizes.push_back(int(g.observations.size()));
    pooled.insert(pooled.end(), g.observations.data(),
                  g.observations.data() + g.observations.size());
  }
  const double big_n = double(pooled.size());
  if (big_n < 3) throw std::domain_error("kruskal_wallis: total N must be >= 3");

  std::vector<double> pooled_sorted = pooled;
  std::sort(pooled_sorted.begin(), pooled_sorted.end());
  const std::vector<double> ranks = midranks(pooled_sorted, pooled);

  AnovaResult res;
  res.degrees_of_freedom = int(groups.size()) - 1;

  std::vector<double> rank_sums(groups.size(), 0.0);
  std::size_t offset = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int i = 0; i < sizes[g]; ++i) rank_sums[g] += ranks[offset + i];
    offset += sizes[g];
  }

  const double ties = tie_sum(pooled_sorted);
  const double correction = 1.0 - ties / (big_n * big_n * big_n - big_n);

  double h = h_from_rank_sums(rank_sums, sizes, big_n);
  if (correction > 0.0)
    h /= correction;
  else
    h = 0.0;  // every observation tied; no rank information
  h = std::max(h, 0.0);
  res.H = h;

  if (pooled.size() <= 12 && multinomial(sizes) <= 2'000'000) {
    ExactCounter counter{ranks, sizes, big_n, h, correction};
    counter.run();
    res.p_value = double(counter.at_least) / double(counter.total);
    res.exact = true;
  } else {
    res.p_value = chi_squared_sf(h, double(res.degrees_of_freedom));
  }

  offset = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    GroupSummary s;
    s.n = sizes[g];
    s.mean = groups[g].observations.mean();
    if (s.n > 1) {
      const double var =
          (groups[g].observations.array() - s.mean).square().sum() / (s.n - 1);
      s.sem = std::sqrt(var / s.n);
    } else {
      s.sem = kNan;
    }
    s.mean_rank = rank_sums[g] / double(sizes[g]);
    res.group_summaries[groups[g].value] = s;
    offset += sizes[g];
  }
  return res;
}

namespace {

// Regularized incomplete beta I_x(a, b), Lentz continued fraction.
double beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-14) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(ln_front) * beta_cf(a, b, x) / a;
  return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

double f_sf(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  return incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

}  // namespace

BrownForsytheResult brown_forsythe(const std::vector<RatioSample>& groups) {
  if (groups.size() < 2)
    throw std::domain_error("brown_forsythe: need at least 2 groups");
  const int k = int(groups.size());
  int big_n = 0;
  std::vector<std::vector<double>> z(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& obs = groups[g].observations;
    if (obs.size() < 2)
      throw std::domain_error("brown_forsythe: every group needs n >= 2");
    big_n += int(obs.size());
    std::vector<double> v = sorted(obs);
    const std::size_t m = v.size() / 2;
    const double med = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    for (double x : v) z[g].push_back(std::abs(x - med));
  }

  double grand = 0.0;
  std::vector<double> group_mean(z.size(), 0.0);
  for (std::size_t g = 0; g < z.size(); ++g) {
    for (double x : z[g]) {
      group_mean[g] += x;
      grand += x;
    }
    group_mean[g] /= double(z[g].size());
  }
  grand /= double(big_n);

  double between = 0.0, within = 0.0;
  for (std::size_t g = 0; g < z.size(); ++g) {
    between += double(z[g].size()) * (group_mean[g] - grand) * (group_mean[g] - grand);
    for (double x : z[g]) within += (x - group_mean[g]) * (x - group_mean[g]);
  }

  BrownForsytheResult res;
  res.df1 = k - 1;
  res.df2 = big_n - k;
  if (res.df2 <= 0) throw std::domain_error("brown_forsythe: not enough observations");
  if (within <= 0.0) {
    // every |deviation| identical within groups; equal spreads by construction
    res.F = between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    res.p_value = between > 0.0 ? 0.0 : 1.0;
    return res;
  }
  res.F = (between / res.df1) / (within / res.df2);
  res.p_value = f_sf(res.F, double(res.df1), double(res.df2));
  return res;
}

std::map<std::pair<std::string, std::string>, double> dunn_posthoc(
    const std::vector<RatioSample>& groups, Correction correction) {
  const AnovaResult kw = kruskal_wallis(groups);  // reuse ranks via summaries
  double big_n = 0.0;
  for (const auto& g : groups) big_n += double(g.observations.size());

  std::vector<double> pooled;
  for (const auto& g : groups)
    pooled.insert(pooled.end(), g.observations.data(),
                  g.observations.data() + g.observations.size());
  std::sort(pooled.begin(), pooled.end());
  const double ties = tie_sum(pooled);
  const double var_term =
      big_n * (big_n + 1.0) / 12.0 - ties / (12.0 * (big_n - 1.0));

  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<double> raw;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const auto& si = kw.group_summaries.at(groups[i].value);
      const auto& sj = kw.group_summaries.at(groups[j].value);
      const double se =
          std::sqrt(var_term * (1.0 / double(si.n) + 1.0 / double(sj.n)));
      const double z = se > 0.0 ? (si.mean_rank - sj.mean_rank) / se : 0.0;
      pairs.emplace_back(groups[i].value, groups[j].value);
      raw.push_back(2.0 * normal_sf(std::abs(z)));
    }
  }

  std::vector<double> adjusted(raw.size());
  switch (correction) {
    case Correction::None:
      adjusted = raw;
      break;
    case Correction::Bonferroni:
      for (std::size_t i = 0; i < raw.size(); ++i)
        adjusted[i] = std::min(1.0, double(raw.size()) * raw[i]);
      break;
    case Correction::Holm: {
      std::vector<std::pair<double, std::size_t>> indexed;
      for (std::size_t i = 0; i < raw.size(); ++i) indexed.emplace_back(raw[i], i);
      holm_adjust(indexed, adjusted);
      break;
    }
  }

  std::map<std::pair<std::string, std::string>, double> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out[pairs[i]] = adjusted[i];
    out[{pairs[i].second, pairs[i].first}] = adjusted[i];
  }
  return out;
}

std::pair<double, double> mean_sem(const Eigen::VectorXd& sample) {
  const auto n = sample.size();
  if (n == 0) throw std::domain_error("mean_sem: empty sample");
  if (n == 1) throw insufficient_n("mean_sem: need at least 2 observations");
  const double mean = sample.mean();
  const double var = (sample.array() - mean).square().sum() / double(n - 1);
  return {mean, std::sqrt(var / double(n))};
}

ScreenResult significance_screen(const InfectionSeries& series,
                                 std::optional<DateInterval> window, double alpha,
                                 Correction correction) {
  ScreenResult result;
  const auto rows = analysis_window(series, window);

  std::map<std::string, std::vector<double>> obs;
  for (const auto& row : rows)
    for (const auto& [value, ratio] : row.ratio_by_value)
      if (ratio) obs[value].push_back(*ratio);

  std::vector<RatioSample> groups;
  for (const auto& [value, v] : obs) {
    if (v.empty()) continue;
    RatioSample g;
    g.value = value;
    g.observations = Eigen::Map<const Eigen::VectorXd>(v.data(), long(v.size()));
    groups.push_back(std::move(g));
  }

  if (groups.size() < 2) {
    result.sufficient = false;
    return result;
  }

  // Advisory pre-tests; ranks are used downstream either way.
  double shapiro_min_p = 1.0;
  bool any_shapiro = false;
  for (const auto& g : groups) {
    if (g.observations.size() < 3 || g.observations.size() > 5000) continue;
    if (g.observations.minCoeff() == g.observations.maxCoeff()) continue;
    any_shapiro = true;
    shapiro_min_p = std::min(shapiro_min_p, shapiro_wilk(g.observations).second);
  }
  if (any_shapiro) result.pretests["shapiro_min_p"] = shapiro_min_p;
  std::vector<std::size_t> by_size(groups.size());
  std::iota(by_size.begin(), by_size.end(), 0);
  std::sort(by_size.begin(), by_size.end(), [&](std::size_t a, std::size_t b) {
    return groups[a].observations.size() > groups[b].observations.size();
  });
  const auto [ks_d, ks_p] =
      ks_two_sample(groups[by_size[0]].observations, groups[by_size[1]].observations);
  result.pretests["ks_D"] = ks_d;
  result.pretests["ks_p"] = ks_p;

  result.anova = kruskal_wallis(groups);
  if (result.anova.p_value >= alpha) return result;

  result.anova.pairwise = dunn_posthoc(groups, correction);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const auto& a = groups[i].value;
      const auto& b = groups[j].value;
      const double p = result.anova.pairwise.at({a, b});
      if (p >= alpha) continue;
      ScreenFinding f;
      f.value_a = a;
      f.value_b = b;
      const auto& sa = result.anova.group_summaries.at(a);
      const auto& sb = result.anova.group_summaries.at(b);
      f.direction = sa.mean_rank > sb.mean_rank ? "higher" : "lower";
      f.adjusted_p = p;
      f.mean_a = sa.mean;
      f.sem_a = std::isnan(sa.sem) ? 0.0 : sa.sem;
      f.mean_b = sb.mean;
      f.sem_b = std::isnan(sb.sem) ? 0.0 : sb.sem;
      result.findings.push_back(std::move(f));
    }
  }
  return result;
}

}  // namespace droptrace
