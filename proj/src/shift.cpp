#include "fairaudit/shift.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "fairaudit/errors.hpp"

namespace fairaudit {

GapDecomposition GapDecomposition::from_terms(double id_gap,
                                              double shift_impact_g2,
                                              double shift_impact_g1) {
  GapDecomposition d;
  d.id_gap = id_gap;
  d.shift_impact_g2 = shift_impact_g2;
  d.shift_impact_g1 = shift_impact_g1;
  d.ood_gap = id_gap + shift_impact_g2 - shift_impact_g1;
  d.change_g1 = -shift_impact_g1;
  d.change_g2 = -shift_impact_g2;
  d.residual = 0.0;
  return d;
}

GapDecomposition decompose_gap(const EvaluationFrame& frame_src,
                               const EvaluationFrame& frame_tar,
                               RateMetric metric, const GroupPair& pair,
                               const ThresholdPolicy& policy,
                               ThresholdMode mode) {
  if (frame_src.model_id != frame_tar.model_id)
    throw ModelMismatch("source frame is for '" + frame_src.model_id +
                        "', target frame is for '" + frame_tar.model_id + "'");

  const FairnessGap src_gap = fairness_gap(frame_src, pair, metric, policy);
  const ThresholdPolicy tar_policy = mode == ThresholdMode::frozen_id
                                         ? ThresholdPolicy::fixed(src_gap.threshold)
                                         : policy;
  const FairnessGap tar_gap = fairness_gap(frame_tar, pair, metric, tar_policy);

  GapDecomposition d;
  d.metric = metric;
  d.pair = pair;
  d.threshold_mode = mode;
  d.threshold_src = src_gap.threshold;
  d.threshold_tar = tar_gap.threshold;
  d.id_gap = src_gap.signed_gap;
  d.shift_impact_g1 = src_gap.value_g1 - tar_gap.value_g1;
  d.shift_impact_g2 = src_gap.value_g2 - tar_gap.value_g2;
  d.change_g1 = -d.shift_impact_g1;
  d.change_g2 = -d.shift_impact_g2;
  d.ood_gap = d.id_gap + d.shift_impact_g2 - d.shift_impact_g1;
  d.residual = tar_gap.signed_gap - d.ood_gap;
  return d;
}

TransferReport transfer_correlation(const std::vector<TransferPoint>& grid_src,
                                    const std::vector<TransferPoint>& grid_tar,
                                    double min_id_auroc) {
  std::map<std::string, const TransferPoint*> tar_by_id;
  for (const auto& p : grid_tar) tar_by_id[p.model_id] = &p;

  std::vector<double> id_auroc, ood_auroc, id_gap, ood_gap;
  for (const auto& p : grid_src) {
    auto it = tar_by_id.find(p.model_id);
    if (it == tar_by_id.end()) continue;
    if (min_id_auroc > 0.0 && p.auroc < min_id_auroc) continue;
    id_auroc.push_back(p.auroc);
    id_gap.push_back(std::abs(p.abs_gap));
    ood_auroc.push_back(it->second->auroc);
    ood_gap.push_back(std::abs(it->second->abs_gap));
  }
  if (id_auroc.size() < 3)
    throw TooFewModels("transfer correlation needs >= 3 shared models, got " +
                       std::to_string(id_auroc.size()));

  TransferReport report;
  report.n_models = id_auroc.size();
  report.min_id_auroc_filter = min_id_auroc;
  report.perf_correlation = pearson(id_auroc, ood_auroc);
  report.fairness_correlation = pearson(id_gap, ood_gap);
  return report;
}

ParetoTransfer pareto_transfer(const std::vector<DualCoordinatePoint>& grid) {
  std::vector<ParetoPoint> id_points, ood_points;
  id_points.reserve(grid.size());
  ood_points.reserve(grid.size());
  for (const auto& p : grid) {
    id_points.push_back({p.model_id, p.id_performance, p.id_gap});
    ood_points.push_back({p.model_id, p.ood_performance, p.ood_gap});
  }
  ParetoTransfer out;
  out.front_id = pareto_front(id_points);
  out.front_ood = pareto_front(ood_points);

  std::set<std::string> id_ids, ood_ids;
  for (const auto& p : out.front_id) id_ids.insert(p.model_id);
  for (const auto& p : out.front_ood) ood_ids.insert(p.model_id);
  for (const auto& id : id_ids)
    if (ood_ids.count(id)) out.retained.push_back(id);
  out.retention_rate =
      id_ids.empty() ? 1.0
                     : static_cast<double>(out.retained.size()) /
                           static_cast<double>(id_ids.size());
  return out;
}

}  // namespace fairaudit
