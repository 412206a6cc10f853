#pragma once

#include <string>
#include <vector>

#include "fairaudit/records.hpp"

namespace fairaudit {

enum class FileFormat { csv, jsonl };

FileFormat format_from_string(const std::string& s);

// Loaders validate every record and report the offending 1-based data row.
std::vector<PredictionRecord> load_predictions(const std::string& path,
                                               FileFormat format = FileFormat::csv);
std::vector<PredictionRecord> parse_predictions(const std::string& text,
                                                FileFormat format,
                                                const std::string& origin);

std::vector<EmbeddingRecord> load_embeddings(const std::string& path,
                                             FileFormat format = FileFormat::csv);
std::vector<EmbeddingRecord> parse_embeddings(const std::string& text,
                                              const std::string& origin);

std::vector<ModelMeta> load_registry(const std::string& path);
std::vector<ModelMeta> parse_registry(const std::string& text,
                                      const std::string& origin);

// Serializers are the loaders' inverse; scores and embedding entries are
// written with 6 decimals, so load -> serialize -> load is lossless.
std::string serialize_predictions_csv(const std::vector<PredictionRecord>& records);
std::string serialize_predictions_jsonl(const std::vector<PredictionRecord>& records);
std::string serialize_embeddings_csv(const std::vector<EmbeddingRecord>& records);
std::string serialize_registry_csv(const std::vector<ModelMeta>& models);

}  // namespace fairaudit
