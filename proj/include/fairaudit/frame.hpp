#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fairaudit/records.hpp"

namespace fairaudit {

/// A validated cohort for one (model, dataset, split) slice and one
/// attribute of interest. Immutable after construction.
struct EvaluationFrame {
  std::string model_id;
  std::string dataset_id;
  Split split = Split::test;
  std::string attribute;
  std::vector<PredictionRecord> records;
  std::vector<std::string> group_universe;  // sorted lexicographically

  const std::string& group_of(std::size_t i) const {
    return records[i].attributes.at(attribute);
  }
  std::vector<double> scores() const;
  std::vector<int> labels() const;
  /// Record indices belonging to `group`; throws UnknownGroup.
  std::vector<std::size_t> group_indices(const std::string& group) const;
  bool has_group(const std::string& group) const;
};

struct FrameBuildResult {
  EvaluationFrame frame;
  std::size_t dropped_missing_attribute = 0;
};

/// Filters records to one (model, dataset, split), drops records whose
/// attribute value is missing or empty (counted), and fixes the group
/// universe. Throws EmptyFrame when nothing survives.
FrameBuildResult build_frame(const std::vector<PredictionRecord>& records,
                             const std::string& model_id,
                             const std::string& dataset_id, Split split,
                             const std::string& attribute);

}  // namespace fairaudit
