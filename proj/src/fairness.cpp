#include "fairaudit/fairness.hpp"

#include <algorithm>
#include <cmath>

#include "fairaudit/errors.hpp"

namespace fairaudit {

namespace {

struct GroupVectors {
  std::vector<double> scores;
  std::vector<int> labels;
  std::size_t n_pos = 0, n_neg = 0;
};

GroupVectors collect_group(const EvaluationFrame& frame, const std::string& group) {
  GroupVectors g;
  for (std::size_t i : frame.group_indices(group)) {
    g.scores.push_back(frame.records[i].score);
    g.labels.push_back(frame.records[i].label);
    if (frame.records[i].label != 0) ++g.n_pos;
    else ++g.n_neg;
  }
  return g;
}

void require_conditioning_class(const GroupVectors& g, const std::string& group,
                                RateMetric metric) {
  const bool needs_pos = metric == RateMetric::tpr || metric == RateMetric::fnr;
  const bool needs_neg = metric == RateMetric::tnr || metric == RateMetric::fpr;
  if (needs_pos && g.n_pos == 0)
    throw MissingClassInGroup("group '" + group + "' has no positives for " +
                              to_string(metric));
  if (needs_neg && g.n_neg == 0)
    throw MissingClassInGroup("group '" + group + "' has no negatives for " +
                              to_string(metric));
  if (metric == RateMetric::accuracy && g.scores.empty())
    throw MissingClassInGroup("group '" + group + "' is empty");
}

}  // namespace

MetricSet group_metrics(const EvaluationFrame& frame,
                        const ThresholdPolicy& policy, std::size_t ece_bins) {
  const auto scores = frame.scores();
  const auto labels = frame.labels();
  MetricSet out;
  out.threshold = resolve_threshold(policy, scores, labels);

  for (const auto& group : frame.group_universe) {
    const GroupVectors g = collect_group(frame, group);
    if (g.scores.empty()) {
      out.warnings.push_back("EmptyGroup: '" + group + "' skipped");
      continue;
    }
    GroupMetrics gm;
    gm.group = group;
    gm.n = g.scores.size();
    gm.threshold = out.threshold;
    gm.counts = rates_at_threshold(g.scores, g.labels, out.threshold);
    if (g.n_pos > 0 && g.n_neg > 0)
      gm.auroc = auroc(g.scores, g.labels);
    else
      out.warnings.push_back("SingleClassGroup: '" + group +
                             "' AUROC not reported");
    if (g.n_pos > 0) gm.average_precision = average_precision(g.scores, g.labels);
    gm.ece = ece(g.scores, g.labels, ece_bins);
    out.groups.push_back(std::move(gm));
  }
  return out;
}

TaskPolarity::Mode TaskPolarity::mode_from_string(const std::string& s) {
  if (s == "underdiagnosis") return Mode::underdiagnosis;
  if (s == "overdiagnosis") return Mode::overdiagnosis;
  throw BadField("unknown polarity '" + s +
                 "' (expected underdiagnosis|overdiagnosis)");
}

FairnessGap fairness_gap(const EvaluationFrame& frame, const GroupPair& pair,
                         RateMetric metric, const ThresholdPolicy& policy) {
  if (pair.g1 == pair.g2)
    throw InvalidConfig("group pair must name two distinct groups");
  const GroupVectors g1 = collect_group(frame, pair.g1);
  const GroupVectors g2 = collect_group(frame, pair.g2);
  require_conditioning_class(g1, pair.g1, metric);
  require_conditioning_class(g2, pair.g2, metric);

  FairnessGap gap;
  gap.metric = metric;
  gap.pair = pair;
  gap.threshold = resolve_threshold(policy, frame.scores(), frame.labels());
  gap.value_g1 =
      rate_value(rates_at_threshold(g1.scores, g1.labels, gap.threshold), metric);
  gap.value_g2 =
      rate_value(rates_at_threshold(g2.scores, g2.labels, gap.threshold), metric);
  gap.signed_gap = gap.value_g1 - gap.value_g2;
  gap.abs_gap = std::abs(gap.signed_gap);
  return gap;
}

FairnessGap fairness_gap(const EvaluationFrame& frame, const GroupPair& pair,
                         const TaskPolarity& polarity, const std::string& task,
                         const ThresholdPolicy& policy) {
  return fairness_gap(frame, pair, polarity.resolve(task), policy);
}

bool dominates(const ParetoPoint& p, const ParetoPoint& q) {
  return p.performance >= q.performance && p.gap <= q.gap &&
         (p.performance > q.performance || p.gap < q.gap);
}

std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points) {
  std::vector<ParetoPoint> front;
  for (const auto& p : points) {
    if (!std::isfinite(p.performance) || !std::isfinite(p.gap))
      throw InvalidConfig("pareto point '" + p.model_id + "' has non-finite coordinates");
    bool dominated = false;
    for (const auto& q : points) {
      if (dominates(q, p)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(p);
  }
  std::sort(front.begin(), front.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.performance != b.performance) return a.performance > b.performance;
    if (a.gap != b.gap) return a.gap < b.gap;
    return a.model_id < b.model_id;
  });
  return front;
}

double GridEntry::metric_or_throw(const std::string& key) const {
  auto it = metrics.find(key);
  if (it == metrics.end() || std::isnan(it->second))
    throw MissingMetric("model '" + model_id + "' lacks metric '" + key + "'");
  return it->second;
}

CorrelationResult tradeoff_correlation(const std::vector<GridEntry>& grid,
                                       const std::string& x_metric,
                                       const std::string& y_metric,
                                       double min_overall_auroc) {
  std::vector<double> xs, ys;
  for (const auto& e : grid) {
    if (e.val_auroc && *e.val_auroc < min_overall_auroc) continue;
    xs.push_back(e.metric_or_throw(x_metric));
    ys.push_back(e.metric_or_throw(y_metric));
  }
  if (xs.size() < 3)
    throw TooFewModels("only " + std::to_string(xs.size()) +
                       " models survive the AUROC >= " +
                       std::to_string(min_overall_auroc) + " filter");
  return pearson(xs, ys);
}

}  // namespace fairaudit
