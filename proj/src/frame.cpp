#include "fairaudit/frame.hpp"

#include <algorithm>
#include <set>

#include "fairaudit/errors.hpp"

namespace fairaudit {

std::vector<double> EvaluationFrame::scores() const {
  std::vector<double> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].score;
  return out;
}

std::vector<int> EvaluationFrame::labels() const {
  std::vector<int> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].label;
  return out;
}

std::vector<std::size_t> EvaluationFrame::group_indices(
    const std::string& group) const {
  if (!has_group(group))
    throw UnknownGroup("group '" + group + "' not in frame universe for attribute '" +
                       attribute + "'");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (group_of(i) == group) out.push_back(i);
  return out;
}

bool EvaluationFrame::has_group(const std::string& group) const {
  return std::binary_search(group_universe.begin(), group_universe.end(), group);
}

FrameBuildResult build_frame(const std::vector<PredictionRecord>& records,
                             const std::string& model_id,
                             const std::string& dataset_id, Split split,
                             const std::string& attribute) {
  FrameBuildResult result;
  result.frame.model_id = model_id;
  result.frame.dataset_id = dataset_id;
  result.frame.split = split;
  result.frame.attribute = attribute;

  std::set<std::string> groups;
  for (const auto& rec : records) {
    if (rec.model_id != model_id || rec.dataset_id != dataset_id ||
        rec.split != split)
      continue;
    auto it = rec.attributes.find(attribute);
    if (it == rec.attributes.end() || it->second.empty()) {
      ++result.dropped_missing_attribute;
      continue;
    }
    groups.insert(it->second);
    result.frame.records.push_back(rec);
  }
  if (result.frame.records.empty())
    throw EmptyFrame("no records match (model_id=" + model_id + ", dataset_id=" +
                     dataset_id + ", split=" + to_string(split) +
                     ", attribute=" + attribute + ")");
  result.frame.group_universe.assign(groups.begin(), groups.end());
  return result;
}

}  // namespace fairaudit
