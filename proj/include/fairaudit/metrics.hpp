#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fairaudit {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  // Rates are NaN when their conditioning class is absent.
  double tpr() const;
  double tnr() const;
  double fpr() const { return 1.0 - tnr(); }
  double fnr() const { return 1.0 - tpr(); }
  double precision() const;
  double recall() const { return tpr(); }
  double accuracy() const;
  double f1() const;  // 2tp / (2tp + fp + fn); 0 when that denominator is 0
};

/// Class-conditioned rates that decompose over per-sample 0/1 losses.
enum class RateMetric { accuracy, tpr, tnr, fpr, fnr };

std::string to_string(RateMetric m);
RateMetric rate_metric_from_string(const std::string& s);
double rate_value(const ConfusionCounts& c, RateMetric m);

struct ThresholdPolicy {
  enum class Kind { fixed, f1_max };
  Kind kind = Kind::f1_max;
  double fixed_threshold = 0.5;

  static ThresholdPolicy f1_max() { return {Kind::f1_max, 0.0}; }
  static ThresholdPolicy fixed(double t);
};

/// Resolves the policy on a score/label vector (the one shared frame-level
/// threshold used for all per-group evaluation).
double resolve_threshold(const ThresholdPolicy& policy,
                         std::span<const double> scores,
                         std::span<const int> labels);

/// Mann-Whitney AUROC with midrank tie handling:
/// P(score_pos > score_neg) + 0.5 * P(tie). Throws DegenerateLabels.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Prediction rule: positive iff score >= threshold.
ConfusionCounts rates_at_threshold(std::span<const double> scores,
                                   std::span<const int> labels,
                                   double threshold);

/// Smallest threshold maximizing F1 over the candidate set {0, 1} plus
/// midpoints of consecutive distinct scores. Throws DegenerateLabels when
/// there is no positive label.
double select_f1_threshold(std::span<const double> scores,
                           std::span<const int> labels);

struct CalibrationBins {
  std::size_t n_bins = 10;
  struct Bin {
    double mean_confidence = 0.0;
    double accuracy = 0.0;
    double weight = 0.0;  // fraction of all samples
    std::size_t count = 0;
  };
  std::vector<Bin> bins;  // size n_bins; empty bins have count 0
  double ece = 0.0;
};

/// Equal-width bins on [0,1]; the last bin is closed at 1.
CalibrationBins calibration_bins(std::span<const double> scores,
                                 std::span<const int> labels,
                                 std::size_t n_bins);
double ece(std::span<const double> scores, std::span<const int> labels,
           std::size_t n_bins = 10);

/// Step-wise average precision over descending-score prefixes with tied
/// scores grouped. Throws DegenerateLabels when there is no positive.
double average_precision(std::span<const double> scores,
                         std::span<const int> labels);

}  // namespace fairaudit
