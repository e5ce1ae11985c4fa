#pragma once

#include <string>
#include <vector>

namespace biasaudit {

enum class SignificanceTest { paired_t, wilcoxon_signed_rank };

const char* to_string(SignificanceTest kind);
SignificanceTest significance_test_from_string(const std::string& name);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  /// Set when the inputs cannot support the test (fewer than two
  /// pairs, or no variation in the differences).
  bool degenerate = false;
};

/// Two-sided paired test of equal means. The Wilcoxon variant uses
/// the normal approximation with tie and continuity corrections and
/// drops zero differences.
TestResult paired_significance(const std::vector<double>& a, const std::vector<double>& b,
                               SignificanceTest kind);

/// Half-width of the two-sided Student-t confidence interval for a
/// sample mean; 0 when fewer than two values or no variance.
double t_interval_half_width(const std::vector<double>& values, double confidence);

/// "***" below 0.01, "**" below 0.05, "*" below 0.1, else "".
std::string significance_stars(double p_value);

/// Kendall rank correlation (tau-a) between paired vectors.
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace biasaudit
