#include "fairaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairaudit/errors.hpp"
#include "fairaudit/parallel.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {

namespace {

bool all_equal(std::span<const double> v) {
  for (double x : v)
    if (x != v.front()) return false;
  return true;
}

/// Continued fraction for the regularized incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double student_t_sf(double t, double dof) {
  if (!std::isfinite(t)) return t > 0 ? 0.0 : 1.0;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(dof / 2.0, 0.5, x);
  return t >= 0.0 ? tail : 1.0 - tail;
}

std::vector<double> midranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = midrank;
    i = j;
  }
  return ranks;
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw LengthMismatch("pearson: " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
  const std::size_t n = x.size();
  if (n < 3)
    throw LengthMismatch("pearson needs n >= 3, got " + std::to_string(n));
  if (all_equal(x)) throw ConstantVector("pearson: x is constant");
  if (all_equal(y)) throw ConstantVector("pearson: y is constant");

  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  CorrelationResult res;
  res.n = n;
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);

  const double dof = static_cast<double>(n - 2);
  const double one_minus_r2 = 1.0 - res.r * res.r;
  if (one_minus_r2 <= 0.0) {
    res.p = 0.0;
  } else {
    const double t = res.r * std::sqrt(dof / one_minus_r2);
    res.p = 2.0 * student_t_sf(std::abs(t), dof);
    if (res.p > 1.0) res.p = 1.0;
  }

  const double z = std::atanh(res.r);
  if (!std::isfinite(z)) {
    res.ci_lo = res.ci_hi = res.r;  // |r| == 1 exactly
  } else if (n == 3) {
    res.ci_lo = -1.0;
    res.ci_hi = 1.0;
  } else {
    constexpr double kZ975 = 1.959963984540054;
    const double se = 1.0 / std::sqrt(static_cast<double>(n - 3));
    res.ci_lo = std::tanh(z - kZ975 * se);
    res.ci_hi = std::tanh(z + kZ975 * se);
  }
  return res;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const std::size_t n = x.size();
  if (n != y.size())
    throw LengthMismatch("spearman: " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mx, dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ConstantVector("spearman: constant ranks");
  return sxy / std::sqrt(sxx * syy);
}

RankTestResult wilcoxon_rank_sum(std::span<const double> a,
                                 std::span<const double> b,
                                 RankAlternative alternative) {
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  if (na == 0 || nb == 0)
    throw LengthMismatch("wilcoxon needs non-empty samples");

  std::vector<double> combined;
  combined.reserve(n);
  combined.insert(combined.end(), a.begin(), a.end());
  combined.insert(combined.end(), b.begin(), b.end());
  const std::vector<double> ranks = midranks(combined);

  double w_obs = 0.0;
  for (std::size_t i = 0; i < na; ++i) w_obs += ranks[i];

  RankTestResult res;
  res.statistic = w_obs;

  if (n <= 12) {
    res.method = RankTestResult::Method::exact;
    // Enumerate all C(n, na) position subsets; midranks are half-integers so
    // the comparisons below are exact.
    std::vector<std::size_t> pick(na);
    std::iota(pick.begin(), pick.end(), 0);
    std::size_t total = 0, favorable = 0;
    const double eps = 1e-9;  // rank sums are half-integers; eps is slack only
    bool more = true;
    while (more) {
      double w = 0.0;
      for (std::size_t idx : pick) w += ranks[idx];
      ++total;
      if (alternative == RankAlternative::a_less ? w <= w_obs + eps
                                                 : w >= w_obs - eps)
        ++favorable;
      more = false;
      for (std::size_t i = na; i-- > 0;) {
        if (pick[i] != i + n - na) {
          ++pick[i];
          for (std::size_t j = i + 1; j < na; ++j) pick[j] = pick[j - 1] + 1;
          more = true;
          break;
        }
      }
    }
    res.p_one_tailed = static_cast<double>(favorable) / static_cast<double>(total);
    return res;
  }

  res.method = RankTestResult::Method::normal_approx;
  const double dn = static_cast<double>(n);
  const double mean_w = static_cast<double>(na) * (dn + 1.0) / 2.0;
  // Tie correction: sum over tie groups of (t^3 - t).
  std::vector<double> sorted(combined);
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double var_w = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                       ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (var_w <= 0.0) {
    res.p_one_tailed = 1.0;  // every observation tied
    return res;
  }
  const double sd = std::sqrt(var_w);
  if (alternative == RankAlternative::a_less)
    res.p_one_tailed = normal_cdf((w_obs - mean_w + 0.5) / sd);
  else
    res.p_one_tailed = normal_cdf(-(w_obs - mean_w - 0.5) / sd);
  return res;
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : s / static_cast<double>(v.size());
}

double quantile_type7(std::vector<double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BootstrapEstimate bootstrap_indices(
    std::size_t n_items,
    const std::function<double(std::span<const std::size_t>)>& statistic,
    std::size_t n_iter, std::uint64_t seed) {
  if (n_items == 0) throw InvalidConfig("bootstrap over empty input");
  if (n_iter == 0) throw InvalidConfig("bootstrap needs n_iter >= 1");

  std::vector<std::size_t> identity(n_items);
  std::iota(identity.begin(), identity.end(), 0);

  BootstrapEstimate est;
  est.n_iter = n_iter;
  est.seed = seed;
  est.point = statistic(identity);

  std::vector<double> stats(n_iter);
  parallel_for(n_iter, [&](std::size_t it) {
    CounterRng rng(seed, it);
    std::vector<std::size_t> sample(n_items);
    for (std::size_t k = 0; k < n_items; ++k)
      sample[k] = static_cast<std::size_t>(rng.next_below(n_items));
    stats[it] = statistic(sample);
  });
  std::sort(stats.begin(), stats.end());
  est.ci_lo = quantile_type7(stats, 0.025);
  est.ci_hi = quantile_type7(std::move(stats), 0.975);
  return est;
}

BootstrapEstimate bootstrap(std::span<const double> values, const Reducer& statistic,
                            std::size_t n_iter, std::uint64_t seed) {
  std::vector<double> buf(values.begin(), values.end());
  return bootstrap_indices(
      buf.size(),
      [&](std::span<const std::size_t> idx) {
        std::vector<double> resampled(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) resampled[k] = buf[idx[k]];
        return statistic(resampled);
      },
      n_iter, seed);
}

}  // namespace fairaudit
