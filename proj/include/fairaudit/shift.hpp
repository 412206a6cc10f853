#pragma once

#include <string>
#include <vector>

#include "fairaudit/fairness.hpp"
#include "fairaudit/frame.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

enum class ThresholdMode { reoptimized, frozen_id };

/// Four-term waterfall of an OOD fairness gap:
///   ood_gap = id_gap + [L(g2,src) - L(g2,tar)] - [L(g1,src) - L(g1,tar)]
/// The identity is algebraic, so `residual` (recomputed difference) stays
/// at floating-point noise.
struct GapDecomposition {
  RateMetric metric = RateMetric::fpr;
  GroupPair pair;
  double id_gap = 0.0;
  double shift_impact_g2 = 0.0;  // L(g2, src) - L(g2, tar)
  double shift_impact_g1 = 0.0;  // L(g1, src) - L(g1, tar)
  double ood_gap = 0.0;
  double residual = 0.0;
  // Fig.-style narration uses the change per group, tar - src.
  double change_g1 = 0.0;
  double change_g2 = 0.0;
  double threshold_src = 0.0;
  double threshold_tar = 0.0;
  ThresholdMode threshold_mode = ThresholdMode::reoptimized;

  /// Reconstructs the waterfall from published terms alone.
  static GapDecomposition from_terms(double id_gap, double shift_impact_g2,
                                     double shift_impact_g1);
};

GapDecomposition decompose_gap(const EvaluationFrame& frame_src,
                               const EvaluationFrame& frame_tar,
                               RateMetric metric, const GroupPair& pair,
                               const ThresholdPolicy& policy,
                               ThresholdMode mode = ThresholdMode::reoptimized);

struct TransferPoint {
  std::string model_id;
  double auroc = 0.0;
  double abs_gap = 0.0;
};

struct TransferReport {
  CorrelationResult perf_correlation;
  CorrelationResult fairness_correlation;
  std::size_t n_models = 0;
  double min_id_auroc_filter = 0.0;  // 0 disables
};

/// Pearson over models shared by both grids: (ID AUROC, OOD AUROC) and
/// (ID abs gap, OOD abs gap). Gaps are absolute magnitudes.
TransferReport transfer_correlation(const std::vector<TransferPoint>& grid_src,
                                    const std::vector<TransferPoint>& grid_tar,
                                    double min_id_auroc = 0.0);

struct ParetoTransfer {
  std::vector<ParetoPoint> front_id;
  std::vector<ParetoPoint> front_ood;
  std::vector<std::string> retained;  // model ids on both fronts
  double retention_rate = 1.0;
};

struct DualCoordinatePoint {
  std::string model_id;
  double id_performance = 0.0;
  double id_gap = 0.0;
  double ood_performance = 0.0;
  double ood_gap = 0.0;
};

ParetoTransfer pareto_transfer(const std::vector<DualCoordinatePoint>& grid);

}  // namespace fairaudit
