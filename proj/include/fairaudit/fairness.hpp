#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/frame.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

struct GroupMetrics {
  std::string group;
  std::size_t n = 0;
  std::optional<double> auroc;  // absent when the group is single-class
  ConfusionCounts counts;
  std::optional<double> average_precision;  // absent without positives
  double ece = 0.0;
  double threshold = 0.0;  // the shared frame-level threshold
};

struct MetricSet {
  double threshold = 0.0;
  std::vector<GroupMetrics> groups;  // group_universe order
  std::vector<std::string> warnings;
};

/// Threshold is resolved once on the whole frame, then applied per group.
MetricSet group_metrics(const EvaluationFrame& frame,
                        const ThresholdPolicy& policy,
                        std::size_t ece_bins = 10);

/// Which class-conditioned error rate a task's fairness gap uses. The
/// default (underdiagnosis) maps the screening task to FPR and disease
/// tasks to FNR; overdiagnosis swaps them.
struct TaskPolarity {
  enum class Mode { underdiagnosis, overdiagnosis };
  Mode mode = Mode::underdiagnosis;
  std::string screening_task = "No Finding";

  RateMetric resolve(const std::string& task) const {
    const bool screening = task == screening_task;
    if (mode == Mode::underdiagnosis)
      return screening ? RateMetric::fpr : RateMetric::fnr;
    return screening ? RateMetric::fnr : RateMetric::fpr;
  }
  static Mode mode_from_string(const std::string& s);
};

struct FairnessGap {
  RateMetric metric = RateMetric::fpr;
  GroupPair pair;
  double value_g1 = 0.0;
  double value_g2 = 0.0;
  double signed_gap = 0.0;  // metric(g1) - metric(g2)
  double abs_gap = 0.0;
  double threshold = 0.0;
};

/// Both groups must carry the metric's conditioning class
/// (throws MissingClassInGroup otherwise).
FairnessGap fairness_gap(const EvaluationFrame& frame, const GroupPair& pair,
                         RateMetric metric, const ThresholdPolicy& policy);
FairnessGap fairness_gap(const EvaluationFrame& frame, const GroupPair& pair,
                         const TaskPolarity& polarity, const std::string& task,
                         const ThresholdPolicy& policy);

struct ParetoPoint {
  std::string model_id;
  double performance = 0.0;  // higher is better
  double gap = 0.0;          // lower is better
};

/// p dominates q iff p.performance >= q.performance and p.gap <= q.gap with
/// at least one strict. Returns the non-dominated set sorted by performance
/// descending (equal-coordinate duplicates all retained).
std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points);
bool dominates(const ParetoPoint& p, const ParetoPoint& q);

struct GridEntry {
  std::string model_id;
  std::string algorithm;
  std::optional<double> val_auroc;
  std::map<std::string, double> metrics;

  double metric_or_throw(const std::string& key) const;
};

/// Pearson correlation between two per-model metrics after dropping models
/// with overall validation AUROC below the cutoff.
CorrelationResult tradeoff_correlation(const std::vector<GridEntry>& grid,
                                       const std::string& x_metric,
                                       const std::string& y_metric,
                                       double min_overall_auroc = 0.7);

}  // namespace fairaudit
