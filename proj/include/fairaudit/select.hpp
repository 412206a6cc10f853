#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairaudit/fairness.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

/// Performance cutoff anchored at the best ERM validation AUROC.
struct CutoffRule {
  enum class Mode { relative_fraction, absolute_points };
  Mode mode = Mode::relative_fraction;
  double value = 0.95;  // fraction f, or percentage points

  static CutoffRule relative(double f) { return {Mode::relative_fraction, f}; }
  static CutoffRule absolute(double pp) { return {Mode::absolute_points, pp}; }
};

struct CutoffResult {
  std::string baseline_model_id;
  double baseline_val_auroc = 0.0;
  double min_val_auroc = 0.0;
  std::vector<GridEntry> retained;
};

/// Throws NoErmBaseline when no ERM-tagged model carries a val AUROC.
CutoffResult apply_cutoff(const std::vector<GridEntry>& grid,
                          const CutoffRule& rule);

struct SelectionCriterion {
  std::string name;
  std::string source_metric;  // key into GridEntry::metrics
  enum class Direction { minimize, maximize } direction = Direction::minimize;
  /// Whether the definition comes from the paper's named criteria or is an
  /// artifact completion of the unnamed remainder.
  bool paper_named = false;
};

/// The three criteria the paper names plus five completions; reports must
/// distinguish the two kinds.
std::vector<SelectionCriterion> default_criteria();

/// Arg-min/arg-max of the criterion metric; ties break toward the
/// lexicographically smaller model_id. Throws MissingMetric.
std::string select_by_criterion(const std::vector<GridEntry>& grid,
                                const SelectionCriterion& criterion);

/// Arg-min of OOD abs gap (the unattainable baseline). `ood_key` names the
/// metric carrying the OOD gap. Throws MissingOodGap.
std::string oracle_select(const std::vector<GridEntry>& grid,
                          const std::string& ood_key = "ood_abs_gap");

struct BenchmarkSetting {
  std::string ood_dataset;
  std::string task;
  std::string attribute;
  std::vector<GridEntry> grid;  // retained models with ID metrics + ood_abs_gap
};

struct CriterionOutcome {
  std::string criterion;
  bool paper_named = false;
  double mean_increase = 0.0;
  BootstrapEstimate ci;
  std::vector<double> per_setting_increase;
  std::vector<std::string> per_setting_selected;
};

struct CriterionBenchmark {
  std::vector<CriterionOutcome> outcomes;  // criterion registry order
  std::vector<std::string> oracle_selected;  // per setting
  std::vector<double> oracle_gap;            // per setting
  /// p[i][j] = one-tailed Wilcoxon p for "criterion i's increases are lower
  /// than criterion j's" (a_less).
  std::vector<std::vector<double>> pairwise_p;
};

/// Criteria mode of the Fig.-style benchmarking protocol: per setting, each
/// criterion selects a model; its OOD gap is compared to the oracle's.
CriterionBenchmark benchmark_criteria(const std::vector<BenchmarkSetting>& settings,
                                      const std::vector<SelectionCriterion>& criteria,
                                      std::size_t bootstrap_iter, std::uint64_t seed,
                                      const std::string& ood_key = "ood_abs_gap",
                                      bool pairwise_tests = false);

/// Algorithm mode: within each setting the retained grid is partitioned by
/// algorithm tag and each partition's min-ID-gap model represents the
/// algorithm. Algorithms missing from a setting get no entry there.
CriterionBenchmark benchmark_algorithms(const std::vector<BenchmarkSetting>& settings,
                                        const std::string& id_gap_key,
                                        std::size_t bootstrap_iter, std::uint64_t seed,
                                        const std::string& ood_key = "ood_abs_gap",
                                        bool pairwise_tests = false);

}  // namespace fairaudit
