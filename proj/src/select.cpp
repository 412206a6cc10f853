#include "fairaudit/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "fairaudit/errors.hpp"

namespace fairaudit {

CutoffResult apply_cutoff(const std::vector<GridEntry>& grid,
                          const CutoffRule& rule) {
  const GridEntry* baseline = nullptr;
  for (const auto& e : grid) {
    if (e.algorithm != "ERM" || !e.val_auroc) continue;
    if (!baseline || *e.val_auroc > *baseline->val_auroc ||
        (*e.val_auroc == *baseline->val_auroc && e.model_id < baseline->model_id))
      baseline = &e;
  }
  if (!baseline)
    throw NoErmBaseline("no ERM-tagged model with a validation AUROC in the grid");

  CutoffResult out;
  out.baseline_model_id = baseline->model_id;
  out.baseline_val_auroc = *baseline->val_auroc;
  out.min_val_auroc = rule.mode == CutoffRule::Mode::relative_fraction
                          ? rule.value * out.baseline_val_auroc
                          : out.baseline_val_auroc - rule.value;
  for (const auto& e : grid) {
    const bool is_baseline = e.model_id == baseline->model_id;
    if (is_baseline || (e.val_auroc && *e.val_auroc >= out.min_val_auroc))
      out.retained.push_back(e);
  }
  return out;
}

std::vector<SelectionCriterion> default_criteria() {
  using D = SelectionCriterion::Direction;
  return {
      {"min_id_fairness_gap", "id_abs_gap", D::minimize, true},
      {"min_attribute_prediction_accuracy", "probe_accuracy", D::minimize, true},
      {"min_attribute_prediction_auroc", "probe_macro_auroc", D::minimize, true},
      {"max_overall_val_auroc", "val_auroc", D::maximize, false},
      {"max_worst_group_val_auroc", "worst_group_val_auroc", D::maximize, false},
      {"min_ece_gap", "ece_gap", D::minimize, false},
      {"min_overall_ece", "ece_overall", D::minimize, false},
      {"min_worst_group_error", "worst_group_error", D::minimize, false},
  };
}

std::string select_by_criterion(const std::vector<GridEntry>& grid,
                                const SelectionCriterion& criterion) {
  if (grid.empty()) throw EmptySetting("selection over an empty grid");
  const GridEntry* best = nullptr;
  double best_value = 0.0;
  for (const auto& e : grid) {
    const double v = e.metric_or_throw(criterion.source_metric);
    const bool better =
        !best ||
        (criterion.direction == SelectionCriterion::Direction::minimize
             ? v < best_value
             : v > best_value) ||
        (v == best_value && e.model_id < best->model_id);
    if (better) {
      best = &e;
      best_value = v;
    }
  }
  return best->model_id;
}

std::string oracle_select(const std::vector<GridEntry>& grid,
                          const std::string& ood_key) {
  if (grid.empty()) throw EmptySetting("oracle selection over an empty grid");
  const GridEntry* best = nullptr;
  double best_gap = 0.0;
  for (const auto& e : grid) {
    auto it = e.metrics.find(ood_key);
    if (it == e.metrics.end() || std::isnan(it->second))
      throw MissingOodGap("model '" + e.model_id + "' lacks '" + ood_key + "'");
    if (!best || it->second < best_gap ||
        (it->second == best_gap && e.model_id < best->model_id)) {
      best = &e;
      best_gap = it->second;
    }
  }
  return best->model_id;
}

namespace {

double gap_of(const std::vector<GridEntry>& grid, const std::string& model_id,
              const std::string& ood_key) {
  for (const auto& e : grid)
    if (e.model_id == model_id) return e.metric_or_throw(ood_key);
  throw MissingOodGap("model '" + model_id + "' not in setting grid");
}

CriterionBenchmark finalize(
    std::vector<CriterionOutcome> outcomes,
    std::vector<std::string> oracle_selected, std::vector<double> oracle_gap,
    std::size_t bootstrap_iter, std::uint64_t seed, bool pairwise_tests) {
  CriterionBenchmark bench;
  bench.oracle_selected = std::move(oracle_selected);
  bench.oracle_gap = std::move(oracle_gap);

  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    auto& outcome = outcomes[c];
    std::vector<double> present;
    for (double v : outcome.per_setting_increase)
      if (!std::isnan(v)) present.push_back(v);
    if (present.empty())
      throw EmptySetting("criterion '" + outcome.criterion +
                         "' resolved in no setting");
    outcome.mean_increase = mean(present);
    outcome.ci = bootstrap(
        present, [](std::span<const double> v) { return mean(v); },
        bootstrap_iter, seed + c);
  }

  if (pairwise_tests) {
    const std::size_t k = outcomes.size();
    bench.pairwise_p.assign(k, std::vector<double>(k, 1.0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        if (i == j) continue;
        std::vector<double> a, b;
        for (std::size_t s = 0; s < outcomes[i].per_setting_increase.size(); ++s) {
          const double vi = outcomes[i].per_setting_increase[s];
          const double vj = outcomes[j].per_setting_increase[s];
          if (std::isnan(vi) || std::isnan(vj)) continue;
          a.push_back(vi);
          b.push_back(vj);
        }
        if (a.empty()) continue;
        bench.pairwise_p[i][j] =
            wilcoxon_rank_sum(a, b, RankAlternative::a_less).p_one_tailed;
      }
  }
  bench.outcomes = std::move(outcomes);
  return bench;
}

}  // namespace

CriterionBenchmark benchmark_criteria(const std::vector<BenchmarkSetting>& settings,
                                      const std::vector<SelectionCriterion>& criteria,
                                      std::size_t bootstrap_iter, std::uint64_t seed,
                                      const std::string& ood_key,
                                      bool pairwise_tests) {
  if (settings.empty()) throw EmptySetting("benchmark needs >= 1 setting");
  std::vector<CriterionOutcome> outcomes(criteria.size());
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    outcomes[c].criterion = criteria[c].name;
    outcomes[c].paper_named = criteria[c].paper_named;
  }
  std::vector<std::string> oracle_selected;
  std::vector<double> oracle_gaps;

  for (const auto& setting : settings) {
    if (setting.grid.empty())
      throw EmptySetting("setting (" + setting.ood_dataset + ", " + setting.task +
                         ", " + setting.attribute + ") has an empty grid");
    const std::string oracle = oracle_select(setting.grid, ood_key);
    const double oracle_gap = gap_of(setting.grid, oracle, ood_key);
    oracle_selected.push_back(oracle);
    oracle_gaps.push_back(oracle_gap);
    for (std::size_t c = 0; c < criteria.size(); ++c) {
      const std::string chosen = select_by_criterion(setting.grid, criteria[c]);
      outcomes[c].per_setting_selected.push_back(chosen);
      outcomes[c].per_setting_increase.push_back(
          gap_of(setting.grid, chosen, ood_key) - oracle_gap);
    }
  }
  return finalize(std::move(outcomes), std::move(oracle_selected),
                  std::move(oracle_gaps), bootstrap_iter, seed, pairwise_tests);
}

CriterionBenchmark benchmark_algorithms(const std::vector<BenchmarkSetting>& settings,
                                        const std::string& id_gap_key,
                                        std::size_t bootstrap_iter, std::uint64_t seed,
                                        const std::string& ood_key,
                                        bool pairwise_tests) {
  if (settings.empty()) throw EmptySetting("benchmark needs >= 1 setting");
  std::set<std::string> algorithm_set;
  for (const auto& s : settings)
    for (const auto& e : s.grid) algorithm_set.insert(e.algorithm);
  const std::vector<std::string> algorithms(algorithm_set.begin(),
                                            algorithm_set.end());

  std::vector<CriterionOutcome> outcomes(algorithms.size());
  for (std::size_t a = 0; a < algorithms.size(); ++a)
    outcomes[a].criterion = algorithms[a];
  std::vector<std::string> oracle_selected;
  std::vector<double> oracle_gaps;

  const SelectionCriterion min_id_gap{"min_id_fairness_gap", id_gap_key,
                                      SelectionCriterion::Direction::minimize, true};
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  for (const auto& setting : settings) {
    if (setting.grid.empty())
      throw EmptySetting("setting (" + setting.ood_dataset + ", " + setting.task +
                         ", " + setting.attribute + ") has an empty grid");
    const std::string oracle = oracle_select(setting.grid, ood_key);
    const double oracle_gap = gap_of(setting.grid, oracle, ood_key);
    oracle_selected.push_back(oracle);
    oracle_gaps.push_back(oracle_gap);
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
      std::vector<GridEntry> partition;
      for (const auto& e : setting.grid)
        if (e.algorithm == algorithms[a]) partition.push_back(e);
      if (partition.empty()) {
        outcomes[a].per_setting_selected.push_back("");
        outcomes[a].per_setting_increase.push_back(kNaN);
        continue;
      }
      const std::string chosen = select_by_criterion(partition, min_id_gap);
      outcomes[a].per_setting_selected.push_back(chosen);
      outcomes[a].per_setting_increase.push_back(
          gap_of(setting.grid, chosen, ood_key) - oracle_gap);
    }
  }
  return finalize(std::move(outcomes), std::move(oracle_selected),
                  std::move(oracle_gaps), bootstrap_iter, seed, pairwise_tests);
}

}  // namespace fairaudit
