#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fairaudit {

enum class Split { train, val, test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);  // throws BadField

/// One model's prediction for one sample. Attributes are opaque strings;
/// an empty string means the value is missing.
struct PredictionRecord {
  std::string sample_id;
  std::string model_id;
  std::string dataset_id;
  Split split = Split::test;
  double score = 0.0;  // P(positive), in [0,1]
  int label = 0;       // {0,1}
  std::map<std::string, std::string> attributes;

  bool operator==(const PredictionRecord&) const = default;
};

struct ModelMeta {
  std::string model_id;
  std::string algorithm;
  std::string task;
  std::string tuned_attribute;
  long long seed = 0;
  std::map<std::string, std::string> hparams;
  std::optional<double> val_auroc;
};

struct EmbeddingRecord {
  std::string sample_id;
  std::string model_id;
  std::vector<double> vector;
};

/// Ordered pair of group labels; gap semantics are metric(g1) - metric(g2).
struct GroupPair {
  std::string g1;
  std::string g2;
};

}  // namespace fairaudit
