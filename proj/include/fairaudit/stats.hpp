#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fairaudit {

struct CorrelationResult {
  double r = 0.0;
  double p = 1.0;       // two-sided t-test
  double ci_lo = -1.0;  // 95% Fisher-z interval
  double ci_hi = 1.0;
  std::size_t n = 0;
};

/// Pearson correlation with two-sided t-test p-value and Fisher-z 95% CI.
/// Requires n >= 3 and non-constant inputs.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation (midranks), no test statistics attached.
double spearman(std::span<const double> x, std::span<const double> y);

enum class RankAlternative { a_less, a_greater };

struct RankTestResult {
  double statistic = 0.0;  // rank sum of sample a, midranks
  double p_one_tailed = 1.0;
  enum class Method { exact, normal_approx } method = Method::exact;
};

/// One-tailed Wilcoxon rank-sum. Exact permutation enumeration when
/// na + nb <= 12, otherwise normal approximation with tie and continuity
/// corrections.
RankTestResult wilcoxon_rank_sum(std::span<const double> a,
                                 std::span<const double> b,
                                 RankAlternative alternative);

struct BootstrapEstimate {
  double point = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n_iter = 0;
  std::uint64_t seed = 0;
};

using Reducer = std::function<double(std::span<const double>)>;

/// Percentile bootstrap (2.5/97.5). Iteration i draws from the counter
/// stream (seed, i), so the estimate is bit-identical for any thread count.
BootstrapEstimate bootstrap(std::span<const double> values, const Reducer& statistic,
                            std::size_t n_iter, std::uint64_t seed);

/// Index-resampling form for statistics over composite units (e.g. settings):
/// the reducer sees a multiset of resampled indices into [0, n_items).
BootstrapEstimate bootstrap_indices(
    std::size_t n_items,
    const std::function<double(std::span<const std::size_t>)>& statistic,
    std::size_t n_iter, std::uint64_t seed);

double mean(std::span<const double> v);

// Numeric helpers shared by the tests.
double normal_cdf(double z);
double student_t_sf(double t, double dof);             // P(T > t)
double regularized_incomplete_beta(double a, double b, double x);
std::vector<double> midranks(std::span<const double> v);
double quantile_type7(std::vector<double> sorted, double q);

}  // namespace fairaudit
