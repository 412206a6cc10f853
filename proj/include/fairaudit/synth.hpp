#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairaudit/records.hpp"
#include "fairaudit/select.hpp"
#include "fairaudit/shift.hpp"

namespace fairaudit {

/// Two-domain shortcut-shift benchmark. A scorer family indexed by the
/// shortcut weight lambda scores both domains; the target domain's
/// label-attribute correlation and attribute-conditional signal shift are
/// derived from (shortcut_corr_src, shortcut_corr_tar).
struct SynthConfig {
  std::size_t n_per_domain = 8000;  // src: 1/2 train, 1/4 val, 1/4 test; tar: all test
  std::size_t feature_dim = 4;
  double signal_strength = 1.0;  // mu
  double prevalence = 0.5;       // pi
  double group_balance = 0.5;
  double shortcut_corr_src = 0.6;
  double shortcut_corr_tar = -0.6;
  std::vector<double> lambda_grid = {0.0, 0.5, 1.0, 2.0, 4.0};
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidConfig

  static SynthConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

// Fixed generator constants (see README for the generative model).
inline constexpr double kSynthAmbiguityGain = 0.9;    // beta: weight of the shared noise channel
inline constexpr double kSynthShiftGain = 0.75;       // scales the target-domain group shift
inline constexpr const char* kSynthAttribute = "group";
inline constexpr const char* kSynthTask = "No Finding";
inline constexpr const char* kSynthSrcDataset = "synth_src";
inline constexpr const char* kSynthTarDataset = "synth_tar";

struct SyntheticBundle {
  SynthConfig config;
  std::vector<std::string> model_ids;          // lambda order
  std::vector<PredictionRecord> predictions;   // both domains, all models
  std::vector<EmbeddingRecord> embeddings;     // source domain, all models
  std::vector<ModelMeta> registry;
};

/// Deterministic in (config, seed): regenerating yields byte-identical files.
SyntheticBundle generate_benchmark(const SynthConfig& config);

/// One file pair per model plus embeddings and the registry, written under
/// `dir` using the standard file schemas. Returns the manifest (relative
/// paths in write order).
std::vector<std::string> write_bundle(const SyntheticBundle& bundle,
                                      const std::string& dir);
SyntheticBundle load_bundle(const std::string& dir);

std::string synth_model_id(double lambda);

/// Closed-form FPR for the generator at a fixed threshold (the Monte Carlo
/// oracle used by the tests): conditions on y=0 and attribute value a.
double synth_expected_fpr(const SynthConfig& config, bool target_domain,
                          double lambda, int a, double threshold);

struct ReferenceModelRow {
  std::string model_id;
  double lambda = 0.0;
  double val_auroc = 0.0;
  double worst_group_val_auroc = 0.0;
  double id_auroc = 0.0;         // source test
  double id_abs_gap = 0.0;
  double id_signed_gap = 0.0;
  double ood_auroc = 0.0;        // target test
  double ood_abs_gap = 0.0;
  double ood_signed_gap = 0.0;
  double ece_overall = 0.0;
  double ece_gap = 0.0;
  double worst_group_error = 0.0;
  double probe_macro_auroc = 0.0;
  double probe_accuracy = 0.0;
  double probe_selected_l2 = 0.0;
  GapDecomposition decomposition;
};

struct ReferenceReport {
  SynthConfig config;
  std::vector<ReferenceModelRow> models;  // lambda order
  double spearman_lambda_probe = 0.0;
  double spearman_lambda_id_gap = 0.0;
  TransferReport transfer;
  ParetoTransfer pareto;
  CutoffResult cutoff;
  CriterionBenchmark benchmark;
  ThresholdMode threshold_mode = ThresholdMode::reoptimized;
  std::size_t ece_bins = 10;
};

struct ReferencePipelineOptions {
  std::uint64_t seed = 0;  // bootstrap streams
  std::size_t ece_bins = 10;
  std::size_t bootstrap_iter = 1000;
  ThresholdMode threshold_mode = ThresholdMode::reoptimized;
  std::vector<double> probe_l2_grid;  // empty -> default grid
};

/// Audit -> probe -> decompose -> pareto -> select, end to end.
ReferenceReport run_reference_pipeline(const SyntheticBundle& bundle,
                                       const ReferencePipelineOptions& options);

}  // namespace fairaudit
