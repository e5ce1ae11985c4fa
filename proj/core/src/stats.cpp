#include "biasaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "biasaudit/types.hpp"

namespace biasaudit {

const char* to_string(SignificanceTest kind) {
  return kind == SignificanceTest::paired_t ? "paired_t" : "wilcoxon_signed_rank";
}

SignificanceTest significance_test_from_string(const std::string& name) {
  if (name == "paired_t") return SignificanceTest::paired_t;
  if (name == "wilcoxon_signed_rank") return SignificanceTest::wilcoxon_signed_rank;
  throw ValidationError("unknown significance test: " + name);
}

namespace {

std::vector<double> paired_differences(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("paired test needs equal-length samples");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

TestResult paired_t(const std::vector<double>& d) {
  TestResult result;
  auto n = static_cast<double>(d.size());
  if (d.size() < 2) {
    result.degenerate = true;
    return result;
  }
  double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    result.degenerate = true;
    result.p_value = mean == 0.0 ? 1.0 : 0.0;
    return result;
  }
  result.statistic = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(n - 1.0);
  result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.statistic)));
  return result;
}

TestResult wilcoxon(const std::vector<double>& d_all) {
  TestResult result;
  std::vector<double> d;
  for (double v : d_all) {
    if (v != 0.0) d.push_back(v);
  }
  if (d.empty()) {
    result.degenerate = true;
    return result;
  }
  auto n = static_cast<double>(d.size());

  // Ranks of |d|, averaging within tie groups.
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<double> rank(d.size());
  double tie_correction = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && std::abs(d[order[j]]) == std::abs(d[order[i]])) ++j;
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) rank[order[k]] = avg;
    auto t = static_cast<double>(j - i);
    tie_correction += t * t * t - t;
    i = j;
  }

  double w_plus = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0.0) w_plus += rank[i];
  }
  double mu = n * (n + 1.0) / 4.0;
  double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_correction / 48.0;
  if (variance <= 0.0) {
    result.degenerate = true;
    return result;
  }
  double diff = w_plus - mu;
  double continuity = diff > 0 ? -0.5 : (diff < 0 ? 0.5 : 0.0);
  result.statistic = (diff + continuity) / std::sqrt(variance);
  boost::math::normal dist;
  result.p_value =
      std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.statistic))));
  return result;
}

}  // namespace

TestResult paired_significance(const std::vector<double>& a, const std::vector<double>& b,
                               SignificanceTest kind) {
  std::vector<double> d = paired_differences(a, b);
  return kind == SignificanceTest::paired_t ? paired_t(d) : wilcoxon(d);
}

double t_interval_half_width(const std::vector<double>& values, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ValidationError("confidence must lie strictly between 0 and 1");
  }
  if (values.size() < 2) return 0.0;
  auto n = static_cast<double>(values.size());
  double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) return 0.0;
  boost::math::students_t dist(n - 1.0);
  double q = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  return q * sd / std::sqrt(n);
}

std::string significance_stars(double p_value) {
  if (p_value < 0.01) return "***";
  if (p_value < 0.05) return "**";
  if (p_value < 0.1) return "*";
  return "";
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("Kendall tau needs two equal-length samples of size >= 2");
  }
  std::int64_t concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      double dx = x[i] - x[j];
      double dy = y[i] - y[j];
      double s = dx * dy;
      if (s > 0) {
        ++concordant;
      } else if (s < 0) {
        ++discordant;
      }
    }
  }
  auto n = static_cast<double>(x.size());
  return static_cast<double>(concordant - discordant) / (n * (n - 1.0) / 2.0);
}

}  // namespace biasaudit
