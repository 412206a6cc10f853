#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace fairaudit {

/// Row-major embedding matrix with integer class targets indexing `classes`.
struct ProbeData {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> x;  // n * dim
  std::vector<int> y;     // class indices into the shared class list

  double at(std::size_t row, std::size_t col) const { return x[row * dim + col]; }
};

struct ProbeModel {
  std::vector<double> weights;  // num_classes * (dim + 1), last column = intercept
  std::size_t num_classes = 0;
  std::size_t dim = 0;
  std::vector<std::string> classes;
  double l2_strength = 0.0;
  // Standardization learned on the training split.
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  bool converged = true;
  std::size_t iterations = 0;

  /// Per-class softmax probabilities, row-major n x num_classes.
  std::vector<double> predict_proba(const ProbeData& data) const;
};

struct ProbeReport {
  double macro_auroc_val = 0.0;
  double macro_auroc_test = 0.0;
  double argmax_accuracy_test = 0.0;
  std::vector<std::string> classes;
  std::vector<std::optional<double>> per_class_auroc_test;
  double selected_l2 = 0.0;
  bool converged = true;
  std::vector<std::string> warnings;
};

/// Default realization of the swept range [1e-5, 10]: 7 log-spaced points.
std::vector<double> default_l2_grid(std::size_t points = 7, double lo = 1e-5,
                                    double hi = 10.0);

/// Objective: sum of cross-entropies + (l2/2)*||W||^2 with the intercept
/// column unpenalized. Deterministic L-BFGS from zero init.
ProbeModel fit_probe_single(const ProbeData& train,
                            const std::vector<std::string>& classes,
                            double l2_strength);

/// Fits one model per grid point and keeps the fit with the best validation
/// macro AUROC (ties toward larger l2). Throws SingleClassTrain.
ProbeModel fit_probe(const ProbeData& train, const ProbeData& val,
                     const std::vector<std::string>& classes,
                     const std::vector<double>& l2_grid);

/// One-vs-rest AUROC per class of the softmax probabilities, macro-averaged
/// over classes present with both polarities; plus argmax accuracy.
ProbeReport evaluate_probe(const ProbeModel& model, const ProbeData& val,
                           const ProbeData& test);

double macro_auroc(const ProbeModel& model, const ProbeData& data);

/// Value of the training objective at the given weights (exposed for the
/// optimality checks in tests).
double probe_objective(const ProbeData& train_standardized, std::size_t num_classes,
                       double l2_strength, const std::vector<double>& weights);

ProbeData standardize_with(const ProbeModel& model, const ProbeData& raw);

}  // namespace fairaudit
