#include "fairaudit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairaudit/errors.hpp"

namespace fairaudit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_same_length(std::span<const double> scores,
                       std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw LengthMismatch("scores (" + std::to_string(scores.size()) +
                         ") vs labels (" + std::to_string(labels.size()) + ")");
}

}  // namespace

double ConfusionCounts::tpr() const {
  return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : kNaN;
}

double ConfusionCounts::tnr() const {
  return tn + fp ? static_cast<double>(tn) / static_cast<double>(tn + fp) : kNaN;
}

double ConfusionCounts::precision() const {
  return tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : kNaN;
}

double ConfusionCounts::accuracy() const {
  return total() ? static_cast<double>(tp + tn) / static_cast<double>(total())
                 : kNaN;
}

double ConfusionCounts::f1() const {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom) : 0.0;
}

std::string to_string(RateMetric m) {
  switch (m) {
    case RateMetric::accuracy: return "accuracy";
    case RateMetric::tpr: return "tpr";
    case RateMetric::tnr: return "tnr";
    case RateMetric::fpr: return "fpr";
    case RateMetric::fnr: return "fnr";
  }
  return "accuracy";
}

RateMetric rate_metric_from_string(const std::string& s) {
  if (s == "accuracy") return RateMetric::accuracy;
  if (s == "tpr") return RateMetric::tpr;
  if (s == "tnr") return RateMetric::tnr;
  if (s == "fpr") return RateMetric::fpr;
  if (s == "fnr") return RateMetric::fnr;
  throw BadField("unknown metric '" + s + "' (expected accuracy|tpr|tnr|fpr|fnr)");
}

double rate_value(const ConfusionCounts& c, RateMetric m) {
  switch (m) {
    case RateMetric::accuracy: return c.accuracy();
    case RateMetric::tpr: return c.tpr();
    case RateMetric::tnr: return c.tnr();
    case RateMetric::fpr: return c.fpr();
    case RateMetric::fnr: return c.fnr();
  }
  return kNaN;
}

ThresholdPolicy ThresholdPolicy::fixed(double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw InvalidConfig("fixed threshold " + std::to_string(t) + " outside [0,1]");
  return {Kind::fixed, t};
}

double resolve_threshold(const ThresholdPolicy& policy,
                         std::span<const double> scores,
                         std::span<const int> labels) {
  if (policy.kind == ThresholdPolicy::Kind::fixed) return policy.fixed_threshold;
  return select_f1_threshold(scores, labels);
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_same_length(scores, labels);
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += (y != 0);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DegenerateLabels("AUROC needs both classes (pos=" +
                           std::to_string(n_pos) + ", neg=" +
                           std::to_string(n_neg) + ")");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum midranks of positives over tie groups.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] != 0) rank_sum_pos += midrank;
    i = j;
  }
  const double u = rank_sum_pos -
                   0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

ConfusionCounts rates_at_threshold(std::span<const double> scores,
                                   std::span<const int> labels,
                                   double threshold) {
  check_same_length(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool pos = labels[i] != 0;
    if (pred && pos) ++c.tp;
    else if (pred && !pos) ++c.fp;
    else if (!pred && pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double select_f1_threshold(std::span<const double> scores,
                           std::span<const int> labels) {
  check_same_length(scores, labels);
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += (y != 0);
  if (n_pos == 0)
    throw DegenerateLabels("F1 threshold selection needs at least one positive");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  // Distinct score groups in descending order, with cumulative tp/fp after
  // including each group. Candidate k predicts positive exactly the first k
  // groups: k=0 is t=1 (unless the top score is 1), k=n_groups is t=0.
  std::vector<double> group_score;
  std::vector<std::size_t> cum_tp, cum_fp;
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < n) {
    std::size_t j = i;
    const double s = scores[order[i]];
    while (j < n && scores[order[j]] == s) {
      if (labels[order[j]] != 0) ++tp;
      else ++fp;
      ++j;
    }
    group_score.push_back(s);
    cum_tp.push_back(tp);
    cum_fp.push_back(fp);
    i = j;
  }
  const std::size_t n_groups = group_score.size();

  const auto f1_at = [&](std::size_t k) {
    const std::size_t ktp = k ? cum_tp[k - 1] : 0;
    const std::size_t kfp = k ? cum_fp[k - 1] : 0;
    const std::size_t kfn = n_pos - ktp;
    const std::size_t denom = 2 * ktp + kfp + kfn;
    return denom ? 2.0 * static_cast<double>(ktp) / static_cast<double>(denom)
                 : 0.0;
  };

  // Candidates visited in ascending threshold order so the first strict
  // maximum is the smallest qualifying threshold.
  double best_t = 0.0, best_f1 = -1.0;
  const auto consider = [&](double t, std::size_t k) {
    const double f1 = f1_at(k);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_t = t;
    }
  };
  consider(0.0, n_groups);  // everything predicted positive
  for (std::size_t g = n_groups; g-- > 1;) {
    const double mid = 0.5 * (group_score[g] + group_score[g - 1]);
    consider(mid, g);
  }
  consider(1.0, group_score.front() >= 1.0 ? 1u : 0u);
  return best_t;
}

CalibrationBins calibration_bins(std::span<const double> scores,
                                 std::span<const int> labels,
                                 std::size_t n_bins) {
  check_same_length(scores, labels);
  if (n_bins == 0) throw InvalidConfig("n_bins must be >= 1");
  CalibrationBins out;
  out.n_bins = n_bins;
  out.bins.resize(n_bins);
  if (scores.empty()) return out;

  std::vector<double> conf_sum(n_bins, 0.0), acc_sum(n_bins, 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::size_t b = static_cast<std::size_t>(scores[i] * static_cast<double>(n_bins));
    if (b >= n_bins) b = n_bins - 1;  // score == 1.0
    ++out.bins[b].count;
    conf_sum[b] += scores[i];
    acc_sum[b] += labels[i] != 0 ? 1.0 : 0.0;
  }
  const double total = static_cast<double>(scores.size());
  double e = 0.0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    auto& bin = out.bins[b];
    if (!bin.count) continue;
    bin.mean_confidence = conf_sum[b] / static_cast<double>(bin.count);
    bin.accuracy = acc_sum[b] / static_cast<double>(bin.count);
    bin.weight = static_cast<double>(bin.count) / total;
    e += bin.weight * std::abs(bin.accuracy - bin.mean_confidence);
  }
  out.ece = e;
  return out;
}

double ece(std::span<const double> scores, std::span<const int> labels,
           std::size_t n_bins) {
  return calibration_bins(scores, labels, n_bins).ece;
}

double average_precision(std::span<const double> scores,
                         std::span<const int> labels) {
  check_same_length(scores, labels);
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += (y != 0);
  if (n_pos == 0)
    throw DegenerateLabels("average precision needs at least one positive");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  double ap = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < n) {
    std::size_t j = i;
    const double s = scores[order[i]];
    while (j < n && scores[order[j]] == s) {
      if (labels[order[j]] != 0) ++tp;
      else ++fp;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

}  // namespace fairaudit
