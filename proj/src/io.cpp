#include "fairaudit/io.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fairaudit/csv.hpp"
#include "fairaudit/errors.hpp"

namespace fairaudit {

namespace {

using ordered_json = nlohmann::ordered_json;

double parse_real(const std::string& s, const std::string& what,
                  const std::string& origin, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw BadField(origin + " row " + std::to_string(row) + ": bad " + what +
                   " '" + s + "'");
  }
}

long long parse_int(const std::string& s, const std::string& what,
                    const std::string& origin, std::size_t row) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw BadField(origin + " row " + std::to_string(row) + ": bad " + what +
                   " '" + s + "'");
  }
}

void validate_prediction(PredictionRecord& rec, const std::string& origin,
                         std::size_t row,
                         std::set<std::string>& seen_keys) {
  if (!(rec.score >= 0.0 && rec.score <= 1.0))
    throw OutOfRangeScore(origin + " row " + std::to_string(row) + ": score " +
                          std::to_string(rec.score) + " outside [0,1]");
  if (rec.label != 0 && rec.label != 1)
    throw NonBinaryLabel(origin + " row " + std::to_string(row) + ": label " +
                         std::to_string(rec.label));
  const std::string key =
      rec.sample_id + "\x1f" + rec.model_id + "\x1f" + rec.dataset_id;
  if (!seen_keys.insert(key).second)
    throw DuplicateKey(origin + " row " + std::to_string(row) +
                       ": duplicate (sample_id, model_id, dataset_id) = (" +
                       rec.sample_id + ", " + rec.model_id + ", " +
                       rec.dataset_id + ")");
}

std::vector<PredictionRecord> parse_predictions_csv(const std::string& text,
                                                    const std::string& origin) {
  const CsvTable table = parse_csv(text, origin);
  for (const char* col :
       {"sample_id", "model_id", "dataset_id", "split", "score", "label"}) {
    if (table.column(col) < 0)
      throw MissingColumn(origin + ": missing column '" + std::string(col) + "'");
  }
  const int c_sample = table.column("sample_id");
  const int c_model = table.column("model_id");
  const int c_dataset = table.column("dataset_id");
  const int c_split = table.column("split");
  const int c_score = table.column("score");
  const int c_label = table.column("label");
  std::vector<std::pair<int, std::string>> attr_cols;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    const std::string& h = table.header[i];
    if (h.rfind("attr_", 0) == 0)
      attr_cols.emplace_back(static_cast<int>(i), h.substr(5));
  }

  std::vector<PredictionRecord> out;
  out.reserve(table.rows.size());
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t row_no = r + 1;  // 1-based data row
    PredictionRecord rec;
    rec.sample_id = row[c_sample];
    rec.model_id = row[c_model];
    rec.dataset_id = row[c_dataset];
    rec.split = split_from_string(row[c_split]);
    rec.score = parse_real(row[c_score], "score", origin, row_no);
    rec.label = static_cast<int>(parse_int(row[c_label], "label", origin, row_no));
    for (const auto& [idx, name] : attr_cols) rec.attributes[name] = row[idx];
    validate_prediction(rec, origin, row_no, seen);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<PredictionRecord> parse_predictions_jsonl(const std::string& text,
                                                      const std::string& origin) {
  std::vector<PredictionRecord> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_no;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw BadField(origin + " row " + std::to_string(row_no) + ": " + e.what());
    }
    for (const char* key :
         {"sample_id", "model_id", "dataset_id", "split", "score", "label"}) {
      if (!j.contains(key))
        throw MissingColumn(origin + " row " + std::to_string(row_no) +
                            ": missing key '" + std::string(key) + "'");
    }
    PredictionRecord rec;
    rec.sample_id = j["sample_id"].get<std::string>();
    rec.model_id = j["model_id"].get<std::string>();
    rec.dataset_id = j["dataset_id"].get<std::string>();
    rec.split = split_from_string(j["split"].get<std::string>());
    rec.score = j["score"].get<double>();
    if (!j["label"].is_number_integer())
      throw NonBinaryLabel(origin + " row " + std::to_string(row_no) +
                           ": label is not an integer");
    rec.label = j["label"].get<int>();
    if (j.contains("attributes")) {
      for (const auto& [k, v] : j["attributes"].items())
        rec.attributes[k] = v.get<std::string>();
    }
    validate_prediction(rec, origin, row_no, seen);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "test";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw BadField("unknown split '" + s + "' (expected train|val|test)");
}

FileFormat format_from_string(const std::string& s) {
  if (s == "csv") return FileFormat::csv;
  if (s == "jsonl") return FileFormat::jsonl;
  throw BadField("unknown format '" + s + "' (expected csv|jsonl)");
}

std::vector<PredictionRecord> parse_predictions(const std::string& text,
                                                FileFormat format,
                                                const std::string& origin) {
  return format == FileFormat::csv ? parse_predictions_csv(text, origin)
                                   : parse_predictions_jsonl(text, origin);
}

std::vector<PredictionRecord> load_predictions(const std::string& path,
                                               FileFormat format) {
  return parse_predictions(read_text_file(path), format, path);
}

std::vector<EmbeddingRecord> parse_embeddings(const std::string& text,
                                              const std::string& origin) {
  const CsvTable table = parse_csv(text, origin);
  if (table.column("sample_id") < 0 || table.column("model_id") < 0)
    throw MissingColumn(origin + ": missing 'sample_id' or 'model_id'");
  std::vector<int> dim_cols;
  for (std::size_t d = 0;; ++d) {
    const int c = table.column("dim_" + std::to_string(d));
    if (c < 0) break;
    dim_cols.push_back(c);
  }
  if (dim_cols.empty())
    throw MissingColumn(origin + ": no 'dim_0' column");
  const int c_sample = table.column("sample_id");
  const int c_model = table.column("model_id");

  std::vector<EmbeddingRecord> out;
  out.reserve(table.rows.size());
  std::map<std::string, std::size_t> model_dim;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t row_no = r + 1;
    EmbeddingRecord rec;
    rec.sample_id = row[c_sample];
    rec.model_id = row[c_model];
    // Trailing empty dim cells mean a narrower vector sharing a wide header;
    // empty interior cells are still malformed.
    std::size_t row_dims = dim_cols.size();
    while (row_dims > 0 && row[dim_cols[row_dims - 1]].empty()) --row_dims;
    if (row_dims == 0)
      throw BadField(origin + " row " + std::to_string(row_no) +
                     ": empty embedding vector");
    rec.vector.reserve(row_dims);
    for (std::size_t d = 0; d < row_dims; ++d) {
      const double v =
          parse_real(row[dim_cols[d]], "embedding entry", origin, row_no);
      if (!std::isfinite(v))
        throw NonFiniteEntry(origin + " row " + std::to_string(row_no) +
                             ": non-finite embedding entry");
      rec.vector.push_back(v);
    }
    auto [it, inserted] = model_dim.emplace(rec.model_id, rec.vector.size());
    if (!inserted && it->second != rec.vector.size())
      throw DimensionMismatch(origin + ": model '" + rec.model_id +
                              "' has vectors of dim " + std::to_string(it->second) +
                              " and " + std::to_string(rec.vector.size()));
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<EmbeddingRecord> load_embeddings(const std::string& path,
                                             FileFormat format) {
  if (format != FileFormat::csv)
    throw BadField("embeddings are CSV-only");
  return parse_embeddings(read_text_file(path), path);
}

std::vector<ModelMeta> parse_registry(const std::string& text,
                                      const std::string& origin) {
  const CsvTable table = parse_csv(text, origin);
  for (const char* col : {"model_id", "algorithm", "task", "tuned_attribute",
                          "seed", "hparams_json", "val_auroc"}) {
    if (table.column(col) < 0)
      throw MissingColumn(origin + ": missing column '" + std::string(col) + "'");
  }
  std::vector<ModelMeta> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t row_no = r + 1;
    ModelMeta m;
    m.model_id = row[table.column("model_id")];
    if (!seen.insert(m.model_id).second)
      throw DuplicateKey(origin + " row " + std::to_string(row_no) +
                         ": duplicate model_id '" + m.model_id + "'");
    m.algorithm = row[table.column("algorithm")];
    m.task = row[table.column("task")];
    m.tuned_attribute = row[table.column("tuned_attribute")];
    m.seed = parse_int(row[table.column("seed")], "seed", origin, row_no);
    const std::string& hp = row[table.column("hparams_json")];
    if (!hp.empty()) {
      try {
        const ordered_json parsed = ordered_json::parse(hp);
        for (const auto& [k, v] : parsed.items())
          m.hparams[k] = v.is_string() ? v.get<std::string>() : v.dump();
      } catch (const std::exception& e) {
        throw BadField(origin + " row " + std::to_string(row_no) +
                       ": bad hparams_json: " + e.what());
      }
    }
    const std::string& va = row[table.column("val_auroc")];
    if (!va.empty()) {
      const double v = parse_real(va, "val_auroc", origin, row_no);
      if (!(v >= 0.0 && v <= 1.0))
        throw BadField(origin + " row " + std::to_string(row_no) +
                       ": val_auroc outside [0,1]");
      m.val_auroc = v;
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ModelMeta> load_registry(const std::string& path) {
  return parse_registry(read_text_file(path), path);
}

std::string serialize_predictions_csv(const std::vector<PredictionRecord>& records) {
  // Attribute columns are the union over records, sorted for stable output.
  std::set<std::string> attr_names;
  for (const auto& r : records)
    for (const auto& [k, v] : r.attributes) attr_names.insert(k);

  std::vector<std::string> header = {"sample_id", "model_id", "dataset_id",
                                     "split",     "score",    "label"};
  for (const auto& a : attr_names) header.push_back("attr_" + a);
  std::string out = join_csv_row(header);
  for (const auto& r : records) {
    std::vector<std::string> row = {r.sample_id,
                                    r.model_id,
                                    r.dataset_id,
                                    to_string(r.split),
                                    format_fixed6(r.score),
                                    std::to_string(r.label)};
    for (const auto& a : attr_names) {
      auto it = r.attributes.find(a);
      row.push_back(it == r.attributes.end() ? "" : it->second);
    }
    out += join_csv_row(row);
  }
  return out;
}

std::string serialize_predictions_jsonl(const std::vector<PredictionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json j;
    j["sample_id"] = r.sample_id;
    j["model_id"] = r.model_id;
    j["dataset_id"] = r.dataset_id;
    j["split"] = to_string(r.split);
    j["score"] = std::stod(format_fixed6(r.score));
    j["label"] = r.label;
    ordered_json attrs = ordered_json::object();
    for (const auto& [k, v] : r.attributes) attrs[k] = v;
    j["attributes"] = attrs;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::string serialize_embeddings_csv(const std::vector<EmbeddingRecord>& records) {
  const std::size_t dim = records.empty() ? 1 : records.front().vector.size();
  std::vector<std::string> header = {"sample_id", "model_id"};
  for (std::size_t d = 0; d < dim; ++d) header.push_back("dim_" + std::to_string(d));
  std::string out = join_csv_row(header);
  for (const auto& r : records) {
    std::vector<std::string> row = {r.sample_id, r.model_id};
    for (double v : r.vector) row.push_back(format_fixed6(v));
    out += join_csv_row(row);
  }
  return out;
}

std::string serialize_registry_csv(const std::vector<ModelMeta>& models) {
  std::string out = join_csv_row({"model_id", "algorithm", "task",
                                  "tuned_attribute", "seed", "hparams_json",
                                  "val_auroc"});
  for (const auto& m : models) {
    ordered_json hp = ordered_json::object();
    for (const auto& [k, v] : m.hparams) hp[k] = v;
    out += join_csv_row({m.model_id, m.algorithm, m.task, m.tuned_attribute,
                         std::to_string(m.seed), hp.dump(),
                         m.val_auroc ? format_fixed6(*m.val_auroc) : ""});
  }
  return out;
}

}  // namespace fairaudit
