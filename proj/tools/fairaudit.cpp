#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairaudit/csv.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/fairness.hpp"
#include "fairaudit/frame.hpp"
#include "fairaudit/io.hpp"
#include "fairaudit/parallel.hpp"
#include "fairaudit/probe.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/select.hpp"
#include "fairaudit/shift.hpp"
#include "fairaudit/synth.hpp"
#include "fairaudit/version.hpp"

namespace {

using namespace fairaudit;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCompute = 3;

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

GroupPair parse_pair(const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 2 || parts[0].empty() || parts[1].empty())
    throw InvalidConfig("--groups expects 'g1,g2', got '" + s + "'");
  if (parts[0] == parts[1])
    throw InvalidConfig("--groups must name two distinct groups");
  return {parts[0], parts[1]};
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return dir + "/" + name;
}

std::vector<double> parse_real_list(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw InvalidConfig(std::string(what) + ": bad number '" + tok + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// audit

struct AuditArgs {
  std::string predictions;
  std::string format = "csv";
  std::string attribute;
  std::string groups;
  std::string task;
  std::string polarity = "underdiagnosis";
  std::string split = "test";
  double fixed_threshold = -1.0;  // <0 -> f1_max
  std::size_t ece_bins = 10;
  std::string out;
};

int run_audit(const AuditArgs& args) {
  const auto records =
      load_predictions(args.predictions, format_from_string(args.format));
  const GroupPair pair = parse_pair(args.groups);
  const TaskPolarity polarity{TaskPolarity::mode_from_string(args.polarity)};
  const RateMetric gap_metric = polarity.resolve(args.task);
  const Split split = split_from_string(args.split);
  const ThresholdPolicy policy = args.fixed_threshold >= 0.0
                                     ? ThresholdPolicy::fixed(args.fixed_threshold)
                                     : ThresholdPolicy::f1_max();

  std::set<std::pair<std::string, std::string>> slices;
  for (const auto& r : records)
    if (r.split == split) slices.insert({r.model_id, r.dataset_id});
  if (slices.empty())
    throw EmptyFrame("no records in split '" + args.split + "'");

  ensure_dir(args.out);
  std::string metrics_csv = join_csv_row(
      {"model_id", "group", "n", "auroc", "tpr", "tnr", "fpr", "fnr", "f1",
       "ap", "ece", "threshold"});
  std::string gaps_csv =
      join_csv_row({"model_id", "metric", "g1", "g2", "signed_gap", "abs_gap"});

  ordered_json config;
  config["predictions"] = args.predictions;
  config["format"] = args.format;
  config["attribute"] = args.attribute;
  config["groups"] = {pair.g1, pair.g2};
  config["task"] = args.task;
  config["polarity"] = args.polarity;
  config["gap_metric"] = to_string(gap_metric);
  config["split"] = args.split;
  config["threshold_policy"] =
      args.fixed_threshold >= 0.0 ? "fixed:" + format_fixed6(args.fixed_threshold)
                                  : "f1_max";
  config["ece_bins"] = args.ece_bins;
  ordered_json doc = make_envelope(config);
  doc["models"] = ordered_json::array();

  for (const auto& [model_id, dataset_id] : slices) {
    const auto built =
        build_frame(records, model_id, dataset_id, split, args.attribute);
    const MetricSet metrics = group_metrics(built.frame, policy, args.ece_bins);
    const FairnessGap gap = fairness_gap(built.frame, pair, gap_metric, policy);

    for (const auto& g : metrics.groups) {
      metrics_csv += join_csv_row(
          {model_id, g.group, std::to_string(g.n),
           g.auroc ? format_fixed6(*g.auroc) : "",
           format_fixed6(g.counts.tpr()), format_fixed6(g.counts.tnr()),
           format_fixed6(g.counts.fpr()), format_fixed6(g.counts.fnr()),
           format_fixed6(g.counts.f1()),
           g.average_precision ? format_fixed6(*g.average_precision) : "",
           format_fixed6(g.ece), format_fixed6(g.threshold)});
    }
    gaps_csv += join_csv_row({model_id, to_string(gap.metric), pair.g1, pair.g2,
                              format_fixed6(gap.signed_gap),
                              format_fixed6(gap.abs_gap)});

    ordered_json jm;
    jm["model_id"] = model_id;
    jm["dataset_id"] = dataset_id;
    jm["dropped_missing_attribute"] = built.dropped_missing_attribute;
    jm["threshold"] = json_real(metrics.threshold);
    jm["groups"] = ordered_json::array();
    for (const auto& g : metrics.groups) {
      ordered_json jg;
      jg["group"] = g.group;
      jg["n"] = g.n;
      jg["auroc"] = g.auroc ? json_real(*g.auroc) : ordered_json(nullptr);
      jg["tpr"] = json_real(g.counts.tpr());
      jg["tnr"] = json_real(g.counts.tnr());
      jg["fpr"] = json_real(g.counts.fpr());
      jg["fnr"] = json_real(g.counts.fnr());
      jg["f1"] = json_real(g.counts.f1());
      jg["ap"] = g.average_precision ? json_real(*g.average_precision)
                                     : ordered_json(nullptr);
      jg["ece"] = json_real(g.ece);
      jm["groups"].push_back(jg);
    }
    ordered_json jgap;
    jgap["metric"] = to_string(gap.metric);
    jgap["g1"] = pair.g1;
    jgap["g2"] = pair.g2;
    jgap["signed_gap"] = json_real(gap.signed_gap);
    jgap["abs_gap"] = json_real(gap.abs_gap);
    jm["gap"] = jgap;
    jm["warnings"] = metrics.warnings;
    doc["models"].push_back(jm);
  }

  write_text_file(join_path(args.out, "metrics.csv"), metrics_csv);
  write_text_file(join_path(args.out, "gaps.csv"), gaps_csv);
  write_json_report(join_path(args.out, "report.json"), doc);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// probe

struct ProbeArgs {
  std::string embeddings;
  std::string predictions;
  std::string model_id;
  std::string dataset_id;
  std::string attribute;
  std::string l2_grid;
  std::string out;
};

int run_probe_cmd(const ProbeArgs& args) {
  const auto embeddings = load_embeddings(args.embeddings);
  const auto predictions = load_predictions(args.predictions);

  std::string model_id = args.model_id;
  if (model_id.empty()) {
    std::set<std::string> ids;
    for (const auto& e : embeddings) ids.insert(e.model_id);
    if (ids.size() != 1)
      throw InvalidConfig("embeddings cover " + std::to_string(ids.size()) +
                          " models; pass --model-id");
    model_id = *ids.begin();
  }
  std::string dataset_id = args.dataset_id;
  if (dataset_id.empty()) {
    std::set<std::string> ids;
    for (const auto& r : predictions)
      if (r.model_id == model_id) ids.insert(r.dataset_id);
    if (ids.size() != 1)
      throw InvalidConfig("predictions cover " + std::to_string(ids.size()) +
                          " datasets for model '" + model_id +
                          "'; pass --dataset-id");
    dataset_id = *ids.begin();
  }

  std::map<std::string, std::pair<Split, std::string>> info;
  for (const auto& r : predictions) {
    if (r.model_id != model_id || r.dataset_id != dataset_id) continue;
    auto it = r.attributes.find(args.attribute);
    if (it == r.attributes.end() || it->second.empty()) continue;
    info[r.sample_id] = {r.split, it->second};
  }
  if (info.empty())
    throw EmptyFrame("no predictions carry attribute '" + args.attribute + "'");

  std::set<std::string> class_set;
  for (const auto& [id, v] : info) class_set.insert(v.second);
  std::vector<std::string> classes(class_set.begin(), class_set.end());
  std::map<std::string, int> class_index;
  for (std::size_t c = 0; c < classes.size(); ++c)
    class_index[classes[c]] = static_cast<int>(c);

  ProbeData train, val, test;
  std::size_t unmatched = 0;
  for (const auto& e : embeddings) {
    if (e.model_id != model_id) continue;
    auto it = info.find(e.sample_id);
    if (it == info.end()) {
      ++unmatched;
      continue;
    }
    ProbeData* d = it->second.first == Split::train ? &train
                   : it->second.first == Split::val ? &val
                                                    : &test;
    if (d->dim == 0) d->dim = e.vector.size();
    d->x.insert(d->x.end(), e.vector.begin(), e.vector.end());
    d->y.push_back(class_index.at(it->second.second));
    ++d->n;
  }
  if (train.n == 0 || val.n == 0 || test.n == 0)
    throw EmptyFrame("probe needs non-empty train/val/test splits (got " +
                     std::to_string(train.n) + "/" + std::to_string(val.n) + "/" +
                     std::to_string(test.n) + ")");

  const std::vector<double> grid = args.l2_grid.empty()
                                       ? default_l2_grid()
                                       : parse_real_list(args.l2_grid, "--l2-grid");
  const ProbeModel model = fit_probe(train, val, classes, grid);
  const ProbeReport report = evaluate_probe(model, val, test);

  ensure_dir(args.out);
  ordered_json config;
  config["embeddings"] = args.embeddings;
  config["predictions"] = args.predictions;
  config["model_id"] = model_id;
  config["dataset_id"] = dataset_id;
  config["attribute"] = args.attribute;
  config["l2_grid"] = grid;
  config["standardization"] = "train-split zero mean, unit variance";
  config["objective"] = "sum cross-entropy + (l2/2)*||W||^2, intercept unpenalized";
  config["accuracy_rule"] = "argmax";
  ordered_json doc = make_envelope(config);
  doc["selected_l2"] = json_real(report.selected_l2);
  doc["macro_auroc_val"] = json_real(report.macro_auroc_val);
  doc["macro_auroc_test"] = json_real(report.macro_auroc_test);
  doc["argmax_accuracy_test"] = json_real(report.argmax_accuracy_test);
  doc["classes"] = report.classes;
  doc["per_class_auroc_test"] = ordered_json::array();
  for (const auto& v : report.per_class_auroc_test)
    doc["per_class_auroc_test"].push_back(v ? json_real(*v) : ordered_json(nullptr));
  doc["converged"] = report.converged;
  doc["unmatched_embeddings"] = unmatched;
  doc["warnings"] = report.warnings;
  write_json_report(join_path(args.out, "probe.json"), doc);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeArgs {
  std::string src;
  std::string tar;
  std::string model_id;
  std::string attribute;
  std::string groups;
  std::string metric;  // explicit, or resolved from task+polarity
  std::string task;
  std::string polarity = "underdiagnosis";
  std::string split = "test";
  bool freeze_threshold = false;
  std::string out;
};

int run_decompose(const DecomposeArgs& args) {
  const auto src_records = load_predictions(args.src);
  const auto tar_records = load_predictions(args.tar);
  const GroupPair pair = parse_pair(args.groups);
  const Split split = split_from_string(args.split);

  RateMetric metric;
  if (!args.metric.empty()) {
    metric = rate_metric_from_string(args.metric);
  } else if (!args.task.empty()) {
    metric = TaskPolarity{TaskPolarity::mode_from_string(args.polarity)}.resolve(
        args.task);
  } else {
    throw InvalidConfig("pass --metric or --task");
  }

  const auto unique_dataset = [](const std::vector<PredictionRecord>& records,
                                 const std::string& model_id,
                                 const std::string& which) {
    std::set<std::string> ids;
    for (const auto& r : records)
      if (model_id.empty() || r.model_id == model_id) ids.insert(r.dataset_id);
    if (ids.size() != 1)
      throw InvalidConfig(which + " file covers " + std::to_string(ids.size()) +
                          " datasets; expected exactly one");
    return *ids.begin();
  };
  std::string model_id = args.model_id;
  if (model_id.empty()) {
    std::set<std::string> ids;
    for (const auto& r : src_records) ids.insert(r.model_id);
    if (ids.size() != 1)
      throw InvalidConfig("source file covers " + std::to_string(ids.size()) +
                          " models; pass --model-id");
    model_id = *ids.begin();
  }

  const auto frame_src =
      build_frame(src_records, model_id, unique_dataset(src_records, model_id, "--src"),
                  split, args.attribute);
  const auto frame_tar =
      build_frame(tar_records, model_id, unique_dataset(tar_records, model_id, "--tar"),
                  split, args.attribute);

  const ThresholdMode mode =
      args.freeze_threshold ? ThresholdMode::frozen_id : ThresholdMode::reoptimized;
  const GapDecomposition d =
      decompose_gap(frame_src.frame, frame_tar.frame, metric, pair,
                    ThresholdPolicy::f1_max(), mode);

  ensure_dir(args.out);
  ordered_json config;
  config["src"] = args.src;
  config["tar"] = args.tar;
  config["model_id"] = model_id;
  config["attribute"] = args.attribute;
  config["groups"] = {pair.g1, pair.g2};
  config["metric"] = to_string(metric);
  config["split"] = args.split;
  config["threshold_mode"] =
      mode == ThresholdMode::frozen_id ? "frozen_id" : "reoptimized";
  ordered_json doc = make_envelope(config);
  doc["id_gap"] = json_real(d.id_gap);
  doc["shift_impact_g2"] = json_real(d.shift_impact_g2);
  doc["shift_impact_g1"] = json_real(d.shift_impact_g1);
  doc["ood_gap"] = json_real(d.ood_gap);
  doc["residual"] = d.residual;  // unrounded on purpose
  doc["change_g1"] = json_real(d.change_g1);
  doc["change_g2"] = json_real(d.change_g2);
  doc["threshold_src"] = json_real(d.threshold_src);
  doc["threshold_tar"] = json_real(d.threshold_tar);
  write_json_report(join_path(args.out, "decomposition.json"), doc);

  std::string waterfall = join_csv_row({"term", "value"});
  waterfall += join_csv_row({"id_gap", format_fixed6(d.id_gap)});
  waterfall += join_csv_row({"shift_impact_g2", format_fixed6(d.shift_impact_g2)});
  waterfall += join_csv_row({"shift_impact_g1", format_fixed6(d.shift_impact_g1)});
  waterfall += join_csv_row({"ood_gap", format_fixed6(d.ood_gap)});
  write_text_file(join_path(args.out, "waterfall.csv"), waterfall);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// pareto

struct ParetoArgs {
  std::string points;
  std::string out;
};

int run_pareto(const ParetoArgs& args) {
  const CsvTable table = read_csv(args.points);
  const int c_model = table.column("model_id");
  if (c_model < 0) throw MissingColumn(args.points + ": missing 'model_id'");
  const bool dual = table.column("ood_performance") >= 0;

  const auto real_at = [&](const std::vector<std::string>& row, const char* col) {
    const int c = table.column(col);
    if (c < 0) throw MissingColumn(args.points + ": missing '" + std::string(col) + "'");
    try {
      return std::stod(row[c]);
    } catch (const std::exception&) {
      throw BadField(args.points + ": bad number '" + row[c] + "' in " + col);
    }
  };

  ensure_dir(args.out);
  ordered_json config;
  config["points"] = args.points;
  config["dual"] = dual;
  ordered_json doc = make_envelope(config);

  if (!dual) {
    std::vector<ParetoPoint> points;
    for (const auto& row : table.rows)
      points.push_back({row[c_model], real_at(row, "performance"), real_at(row, "gap")});
    const auto front = pareto_front(points);
    std::set<std::string> on_front;
    for (const auto& p : front) on_front.insert(p.model_id);

    std::string csv = join_csv_row({"model_id", "performance", "gap", "on_front"});
    for (const auto& p : points)
      csv += join_csv_row({p.model_id, format_fixed6(p.performance),
                           format_fixed6(p.gap),
                           on_front.count(p.model_id) ? "1" : "0"});
    write_text_file(join_path(args.out, "pareto.csv"), csv);
    doc["front"] = ordered_json::array();
    for (const auto& p : front)
      doc["front"].push_back({{"model_id", p.model_id},
                              {"performance", json_real(p.performance)},
                              {"gap", json_real(p.gap)}});
    doc["front_size"] = front.size();
  } else {
    std::vector<DualCoordinatePoint> points;
    for (const auto& row : table.rows)
      points.push_back({row[c_model], real_at(row, "performance"),
                        real_at(row, "gap"), real_at(row, "ood_performance"),
                        real_at(row, "ood_gap")});
    const ParetoTransfer transfer = pareto_transfer(points);
    std::set<std::string> id_front, ood_front;
    for (const auto& p : transfer.front_id) id_front.insert(p.model_id);
    for (const auto& p : transfer.front_ood) ood_front.insert(p.model_id);

    std::string csv = join_csv_row({"model_id", "performance", "gap", "on_front",
                                    "ood_performance", "ood_gap", "on_front_ood"});
    for (const auto& p : points)
      csv += join_csv_row({p.model_id, format_fixed6(p.id_performance),
                           format_fixed6(p.id_gap),
                           id_front.count(p.model_id) ? "1" : "0",
                           format_fixed6(p.ood_performance),
                           format_fixed6(p.ood_gap),
                           ood_front.count(p.model_id) ? "1" : "0"});
    write_text_file(join_path(args.out, "pareto.csv"), csv);
    doc["retained"] = transfer.retained;
    doc["retention_rate"] = json_real(transfer.retention_rate);
    doc["front_id_size"] = transfer.front_id.size();
    doc["front_ood_size"] = transfer.front_ood.size();
  }
  write_json_report(join_path(args.out, "pareto.json"), doc);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// correlate

struct CorrelateArgs {
  std::string grid;
  std::string x_metric;
  std::string y_metric;
  double min_auroc = 0.7;
  std::string out;
};

std::vector<GridEntry> read_grid_csv(const std::string& path,
                                     std::vector<std::string>* setting_cols_out,
                                     std::vector<std::vector<std::string>>* setting_vals_out) {
  const CsvTable table = read_csv(path);
  const int c_model = table.column("model_id");
  if (c_model < 0) throw MissingColumn(path + ": missing 'model_id'");
  const int c_algo = table.column("algorithm");
  const int c_val = table.column("val_auroc");

  std::vector<std::pair<int, std::string>> metric_cols;
  std::vector<std::pair<int, std::string>> setting_cols;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    const std::string& h = table.header[i];
    if (h == "model_id" || h == "algorithm") continue;
    if (h == "ood_dataset" || h == "task" || h == "attribute") {
      setting_cols.emplace_back(static_cast<int>(i), h);
      continue;
    }
    metric_cols.emplace_back(static_cast<int>(i), h);
  }

  std::vector<GridEntry> grid;
  for (const auto& row : table.rows) {
    GridEntry e;
    e.model_id = row[c_model];
    if (c_algo >= 0) e.algorithm = row[c_algo];
    for (const auto& [idx, name] : metric_cols) {
      if (row[idx].empty()) continue;
      try {
        e.metrics[name] = std::stod(row[idx]);
      } catch (const std::exception&) {
        throw BadField(path + ": bad number '" + row[idx] + "' in column " + name);
      }
    }
    if (c_val >= 0 && !row[c_val].empty()) e.val_auroc = e.metrics.at("val_auroc");
    grid.push_back(std::move(e));
    if (setting_vals_out) {
      std::vector<std::string> vals;
      for (const auto& [idx, name] : setting_cols) vals.push_back(row[idx]);
      setting_vals_out->push_back(std::move(vals));
    }
  }
  if (setting_cols_out)
    for (const auto& [idx, name] : setting_cols) setting_cols_out->push_back(name);
  return grid;
}

int run_correlate(const CorrelateArgs& args) {
  const auto grid = read_grid_csv(args.grid, nullptr, nullptr);
  const CorrelationResult r =
      tradeoff_correlation(grid, args.x_metric, args.y_metric, args.min_auroc);

  ensure_dir(args.out);
  ordered_json config;
  config["grid"] = args.grid;
  config["x"] = args.x_metric;
  config["y"] = args.y_metric;
  config["min_overall_auroc"] = args.min_auroc;
  config["ci_method"] = "fisher_z";
  ordered_json doc = make_envelope(config);
  doc["r"] = json_real(r.r);
  doc["p"] = r.p;  // p-values keep full precision
  doc["ci95"] = {json_real(r.ci_lo), json_real(r.ci_hi)};
  doc["n"] = r.n;
  write_json_report(join_path(args.out, "correlation.json"), doc);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// select

struct SelectArgs {
  std::string grid;
  std::string criteria;  // comma list; empty -> all defaults
  std::string mode = "criteria";
  double cutoff = 0.95;
  bool cutoff_absolute = false;
  std::uint64_t seed = 0;
  std::size_t bootstrap_iter = 1000;
  bool pairwise = false;
  std::string out;
};

int run_select(const SelectArgs& args) {
  std::vector<std::string> setting_cols;
  std::vector<std::vector<std::string>> setting_vals;
  const auto grid = read_grid_csv(args.grid, &setting_cols, &setting_vals);
  if (grid.empty()) throw EmptySetting("grid file has no rows");

  // Group rows into settings by (ood_dataset, task, attribute) when present.
  std::map<std::vector<std::string>, BenchmarkSetting> settings_map;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::vector<std::string> key =
        setting_vals.empty() ? std::vector<std::string>{}
                             : setting_vals[i];
    auto& setting = settings_map[key];
    for (std::size_t c = 0; c < setting_cols.size(); ++c) {
      if (setting_cols[c] == "ood_dataset") setting.ood_dataset = key[c];
      if (setting_cols[c] == "task") setting.task = key[c];
      if (setting_cols[c] == "attribute") setting.attribute = key[c];
    }
    setting.grid.push_back(grid[i]);
  }

  const CutoffRule rule = args.cutoff_absolute ? CutoffRule::absolute(args.cutoff)
                                               : CutoffRule::relative(args.cutoff);
  std::vector<BenchmarkSetting> settings;
  ordered_json cutoff_info = ordered_json::array();
  for (auto& [key, setting] : settings_map) {
    const CutoffResult cut = apply_cutoff(setting.grid, rule);
    ordered_json jc;
    jc["setting"] = setting.ood_dataset + "|" + setting.task + "|" + setting.attribute;
    jc["baseline_model"] = cut.baseline_model_id;
    jc["baseline_val_auroc"] = json_real(cut.baseline_val_auroc);
    jc["min_val_auroc"] = json_real(cut.min_val_auroc);
    jc["retained"] = cut.retained.size();
    cutoff_info.push_back(jc);
    setting.grid = cut.retained;
    settings.push_back(std::move(setting));
  }

  std::vector<SelectionCriterion> criteria = default_criteria();
  if (!args.criteria.empty()) {
    std::vector<SelectionCriterion> chosen;
    for (const auto& name : split_list(args.criteria)) {
      bool found = false;
      for (const auto& c : criteria)
        if (c.name == name) {
          chosen.push_back(c);
          found = true;
        }
      if (!found) throw InvalidConfig("unknown criterion '" + name + "'");
    }
    criteria = std::move(chosen);
  }

  CriterionBenchmark bench;
  if (args.mode == "criteria") {
    bench = benchmark_criteria(settings, criteria, args.bootstrap_iter, args.seed,
                               "ood_abs_gap", args.pairwise);
  } else if (args.mode == "algorithms") {
    bench = benchmark_algorithms(settings, "id_abs_gap", args.bootstrap_iter,
                                 args.seed, "ood_abs_gap", args.pairwise);
  } else {
    throw InvalidConfig("--mode must be criteria|algorithms");
  }

  ensure_dir(args.out);
  std::string csv = join_csv_row({"criterion", "setting", "selected_model",
                                  "ood_gap", "oracle_model", "oracle_gap",
                                  "increase"});
  for (const auto& outcome : bench.outcomes) {
    for (std::size_t s = 0; s < settings.size(); ++s) {
      const double inc = outcome.per_setting_increase[s];
      if (std::isnan(inc)) continue;
      const std::string setting_name = settings[s].ood_dataset + "|" +
                                       settings[s].task + "|" +
                                       settings[s].attribute;
      csv += join_csv_row(
          {outcome.criterion, setting_name, outcome.per_setting_selected[s],
           format_fixed6(inc + bench.oracle_gap[s]), bench.oracle_selected[s],
           format_fixed6(bench.oracle_gap[s]), format_fixed6(inc)});
    }
  }
  write_text_file(join_path(args.out, "selection.csv"), csv);

  ordered_json config;
  config["grid"] = args.grid;
  config["mode"] = args.mode;
  config["cutoff"] = args.cutoff;
  config["cutoff_mode"] = args.cutoff_absolute ? "absolute_points" : "relative_fraction";
  config["bootstrap_iter"] = args.bootstrap_iter;
  config["seed"] = args.seed;
  ordered_json doc = make_envelope(config);
  doc["cutoff"] = cutoff_info;
  doc["summary"] = ordered_json::array();
  for (const auto& outcome : bench.outcomes) {
    ordered_json jo;
    jo["criterion"] = outcome.criterion;
    jo["definition_source"] =
        args.mode == "algorithms" ? "algorithm"
        : outcome.paper_named    ? "paper"
                                 : "artifact completion";
    jo["mean_increase"] = json_real(outcome.mean_increase);
    jo["ci95"] = {json_real(outcome.ci.ci_lo), json_real(outcome.ci.ci_hi)};
    doc["summary"].push_back(jo);
  }
  if (args.pairwise) {
    doc["wilcoxon_one_tailed_p"] = ordered_json::array();
    for (std::size_t i = 0; i < bench.outcomes.size(); ++i)
      for (std::size_t j = 0; j < bench.outcomes.size(); ++j) {
        if (i == j) continue;
        doc["wilcoxon_one_tailed_p"].push_back(
            {{"lower", bench.outcomes[i].criterion},
             {"higher", bench.outcomes[j].criterion},
             {"p", bench.pairwise_p[i][j]}});
      }
  } else {
    doc["wilcoxon_one_tailed_p"] = ordered_json::array();
  }
  write_json_report(join_path(args.out, "selection_summary.json"), doc);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth + report

struct SynthArgs {
  std::string config;
  std::string out;
};

int run_synth(const SynthArgs& args) {
  const SynthConfig config = SynthConfig::from_json_text(read_text_file(args.config));
  const SyntheticBundle bundle = generate_benchmark(config);
  ensure_dir(args.out);
  const auto manifest = write_bundle(bundle, args.out);

  ordered_json jc = ordered_json::parse(config.to_json_text());
  ordered_json doc = make_envelope(jc);
  doc["files"] = manifest;
  write_json_report(join_path(args.out, "synth_manifest.json"), doc);
  return kExitOk;
}

struct ReportArgs {
  std::string bundle;
  std::uint64_t seed = 0;
  std::size_t ece_bins = 10;
  std::size_t bootstrap_iter = 1000;
  bool freeze_threshold = false;
  std::string out;
};

int run_report(const ReportArgs& args) {
  const SyntheticBundle bundle = load_bundle(args.bundle);
  ReferencePipelineOptions options;
  options.seed = args.seed;
  options.ece_bins = args.ece_bins;
  options.bootstrap_iter = args.bootstrap_iter;
  options.threshold_mode = args.freeze_threshold ? ThresholdMode::frozen_id
                                                 : ThresholdMode::reoptimized;
  const ReferenceReport report = run_reference_pipeline(bundle, options);

  ensure_dir(args.out);
  std::string models_csv = join_csv_row(
      {"model_id", "lambda", "val_auroc", "worst_group_val_auroc", "id_auroc",
       "id_abs_gap", "ood_auroc", "ood_abs_gap", "probe_macro_auroc",
       "probe_accuracy", "ece_overall", "ece_gap", "worst_group_error"});
  std::string decomposition_csv = join_csv_row(
      {"model_id", "id_gap", "shift_impact_g2", "shift_impact_g1", "ood_gap",
       "residual"});
  for (const auto& m : report.models) {
    models_csv += join_csv_row(
        {m.model_id, format_fixed6(m.lambda), format_fixed6(m.val_auroc),
         format_fixed6(m.worst_group_val_auroc), format_fixed6(m.id_auroc),
         format_fixed6(m.id_abs_gap), format_fixed6(m.ood_auroc),
         format_fixed6(m.ood_abs_gap), format_fixed6(m.probe_macro_auroc),
         format_fixed6(m.probe_accuracy), format_fixed6(m.ece_overall),
         format_fixed6(m.ece_gap), format_fixed6(m.worst_group_error)});
    decomposition_csv += join_csv_row(
        {m.model_id, format_fixed6(m.decomposition.id_gap),
         format_fixed6(m.decomposition.shift_impact_g2),
         format_fixed6(m.decomposition.shift_impact_g1),
         format_fixed6(m.decomposition.ood_gap),
         format_fixed6(m.decomposition.residual)});
  }
  write_text_file(join_path(args.out, "models.csv"), models_csv);
  write_text_file(join_path(args.out, "decomposition.csv"), decomposition_csv);

  std::set<std::string> id_front, ood_front;
  for (const auto& p : report.pareto.front_id) id_front.insert(p.model_id);
  for (const auto& p : report.pareto.front_ood) ood_front.insert(p.model_id);
  std::string pareto_csv = join_csv_row({"model_id", "performance", "gap",
                                         "on_front", "ood_performance", "ood_gap",
                                         "on_front_ood"});
  for (const auto& m : report.models)
    pareto_csv += join_csv_row(
        {m.model_id, format_fixed6(m.id_auroc), format_fixed6(m.id_abs_gap),
         id_front.count(m.model_id) ? "1" : "0", format_fixed6(m.ood_auroc),
         format_fixed6(m.ood_abs_gap), ood_front.count(m.model_id) ? "1" : "0"});
  write_text_file(join_path(args.out, "pareto.csv"), pareto_csv);

  std::string transfer_csv = join_csv_row(
      {"setting", "perf_r", "perf_p", "perf_ci_lo", "perf_ci_hi", "fairness_r",
       "fairness_p", "fairness_ci_lo", "fairness_ci_hi", "n_models"});
  const auto& tr = report.transfer;
  transfer_csv += join_csv_row(
      {std::string(kSynthTarDataset) + "|" + kSynthTask + "|" + kSynthAttribute,
       format_fixed6(tr.perf_correlation.r), format_fixed6(tr.perf_correlation.p),
       format_fixed6(tr.perf_correlation.ci_lo),
       format_fixed6(tr.perf_correlation.ci_hi),
       format_fixed6(tr.fairness_correlation.r),
       format_fixed6(tr.fairness_correlation.p),
       format_fixed6(tr.fairness_correlation.ci_lo),
       format_fixed6(tr.fairness_correlation.ci_hi),
       std::to_string(tr.n_models)});
  write_text_file(join_path(args.out, "transfer.csv"), transfer_csv);

  std::string selection_csv = join_csv_row({"criterion", "setting",
                                            "selected_model", "ood_gap",
                                            "oracle_model", "oracle_gap",
                                            "increase"});
  const std::string setting_name =
      std::string(kSynthTarDataset) + "|" + kSynthTask + "|" + kSynthAttribute;
  for (const auto& outcome : report.benchmark.outcomes)
    selection_csv += join_csv_row(
        {outcome.criterion, setting_name, outcome.per_setting_selected[0],
         format_fixed6(outcome.per_setting_increase[0] +
                       report.benchmark.oracle_gap[0]),
         report.benchmark.oracle_selected[0],
         format_fixed6(report.benchmark.oracle_gap[0]),
         format_fixed6(outcome.per_setting_increase[0])});
  write_text_file(join_path(args.out, "selection.csv"), selection_csv);

  ordered_json config = ordered_json::parse(report.config.to_json_text());
  config["bundle"] = args.bundle;
  config["seed"] = args.seed;
  config["ece_bins"] = args.ece_bins;
  config["bootstrap_iter"] = args.bootstrap_iter;
  config["threshold_mode"] = args.freeze_threshold ? "frozen_id" : "reoptimized";
  config["gap_kind"] = "absolute";
  ordered_json doc = make_envelope(config);
  doc["models"] = ordered_json::array();
  for (const auto& m : report.models) {
    ordered_json jm;
    jm["model_id"] = m.model_id;
    jm["lambda"] = json_real(m.lambda);
    jm["val_auroc"] = json_real(m.val_auroc);
    jm["id_auroc"] = json_real(m.id_auroc);
    jm["id_abs_gap"] = json_real(m.id_abs_gap);
    jm["ood_auroc"] = json_real(m.ood_auroc);
    jm["ood_abs_gap"] = json_real(m.ood_abs_gap);
    jm["probe_macro_auroc"] = json_real(m.probe_macro_auroc);
    jm["probe_accuracy"] = json_real(m.probe_accuracy);
    jm["probe_selected_l2"] = json_real(m.probe_selected_l2);
    doc["models"].push_back(jm);
  }
  doc["spearman_lambda_probe"] = json_real(report.spearman_lambda_probe);
  doc["spearman_lambda_id_gap"] = json_real(report.spearman_lambda_id_gap);
  doc["transfer"] = {{"perf_r", json_real(tr.perf_correlation.r)},
                     {"fairness_r", json_real(tr.fairness_correlation.r)},
                     {"n_models", tr.n_models}};
  doc["pareto_retention_rate"] = json_real(report.pareto.retention_rate);
  doc["cutoff"] = {{"baseline_model", report.cutoff.baseline_model_id},
                   {"baseline_val_auroc", json_real(report.cutoff.baseline_val_auroc)},
                   {"min_val_auroc", json_real(report.cutoff.min_val_auroc)},
                   {"retained", report.cutoff.retained.size()}};
  doc["selection"] = ordered_json::array();
  for (const auto& outcome : report.benchmark.outcomes) {
    ordered_json jo;
    jo["criterion"] = outcome.criterion;
    jo["definition_source"] = outcome.paper_named ? "paper" : "artifact completion";
    jo["selected_model"] = outcome.per_setting_selected[0];
    jo["increase_over_oracle"] = json_real(outcome.per_setting_increase[0]);
    doc["selection"].push_back(jo);
  }
  doc["oracle_model"] = report.benchmark.oracle_selected[0];
  write_json_report(join_path(args.out, "report.json"), doc);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairness-under-shift audit engine"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker cap (default: FAIRAUDIT_THREADS or 1)");

  AuditArgs audit_args;
  auto* audit = app.add_subcommand("audit", "per-group metrics and fairness gaps");
  audit->add_option("--predictions", audit_args.predictions)->required();
  audit->add_option("--format", audit_args.format);
  audit->add_option("--attribute", audit_args.attribute)->required();
  audit->add_option("--groups", audit_args.groups)->required();
  audit->add_option("--task", audit_args.task)->required();
  audit->add_option("--polarity", audit_args.polarity);
  audit->add_option("--split", audit_args.split);
  audit->add_option("--threshold", audit_args.fixed_threshold,
                    "fixed threshold (omit for f1-max)");
  audit->add_option("--ece-bins", audit_args.ece_bins);
  audit->add_option("--out", audit_args.out)->required();

  ProbeArgs probe_args;
  auto* probe = app.add_subcommand("probe", "attribute-encoding probe on embeddings");
  probe->add_option("--embeddings", probe_args.embeddings)->required();
  probe->add_option("--predictions", probe_args.predictions)->required();
  probe->add_option("--model-id", probe_args.model_id);
  probe->add_option("--dataset-id", probe_args.dataset_id);
  probe->add_option("--attribute", probe_args.attribute)->required();
  probe->add_option("--l2-grid", probe_args.l2_grid, "comma list, default 7 log points");
  probe->add_option("--out", probe_args.out)->required();

  DecomposeArgs decompose_args;
  auto* decompose = app.add_subcommand("decompose", "OOD fairness-gap waterfall");
  decompose->add_option("--src", decompose_args.src)->required();
  decompose->add_option("--tar", decompose_args.tar)->required();
  decompose->add_option("--model-id", decompose_args.model_id);
  decompose->add_option("--attribute", decompose_args.attribute)->required();
  decompose->add_option("--groups", decompose_args.groups)->required();
  decompose->add_option("--metric", decompose_args.metric);
  decompose->add_option("--task", decompose_args.task);
  decompose->add_option("--polarity", decompose_args.polarity);
  decompose->add_option("--split", decompose_args.split);
  decompose->add_flag("--freeze-threshold", decompose_args.freeze_threshold);
  decompose->add_option("--out", decompose_args.out)->required();

  ParetoArgs pareto_args;
  auto* pareto = app.add_subcommand("pareto", "dominance filtering of model grids");
  pareto->add_option("--points", pareto_args.points)->required();
  pareto->add_option("--out", pareto_args.out)->required();

  CorrelateArgs correlate_args;
  auto* correlate = app.add_subcommand("correlate", "trade-off correlations");
  correlate->add_option("--grid", correlate_args.grid)->required();
  correlate->add_option("--x", correlate_args.x_metric)->required();
  correlate->add_option("--y", correlate_args.y_metric)->required();
  correlate->add_option("--min-auroc", correlate_args.min_auroc);
  correlate->add_option("--out", correlate_args.out)->required();

  SelectArgs select_args;
  auto* select = app.add_subcommand("select", "criteria benchmarking vs OOD oracle");
  select->add_option("--grid", select_args.grid)->required();
  select->add_option("--criteria", select_args.criteria);
  select->add_option("--mode", select_args.mode, "criteria|algorithms");
  select->add_option("--cutoff", select_args.cutoff);
  select->add_flag("--cutoff-absolute", select_args.cutoff_absolute);
  select->add_option("--seed", select_args.seed)->required();
  select->add_option("--bootstrap-iter", select_args.bootstrap_iter);
  select->add_flag("--pairwise", select_args.pairwise);
  select->add_option("--out", select_args.out)->required();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "write a synthetic shortcut-shift bundle");
  synth->add_option("--config", synth_args.config)->required();
  synth->add_option("--out", synth_args.out)->required();

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "full reference pipeline on a bundle");
  report->add_option("--bundle", report_args.bundle)->required();
  report->add_option("--seed", report_args.seed)->required();
  report->add_option("--ece-bins", report_args.ece_bins);
  report->add_option("--bootstrap-iter", report_args.bootstrap_iter);
  report->add_flag("--freeze-threshold", report_args.freeze_threshold);
  report->add_option("--out", report_args.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (threads <= 0) {
    const char* env = std::getenv("FAIRAUDIT_THREADS");
    threads = env ? std::atoi(env) : 1;
  }
  set_thread_cap(threads);

  try {
    if (*audit) return run_audit(audit_args);
    if (*probe) return run_probe_cmd(probe_args);
    if (*decompose) return run_decompose(decompose_args);
    if (*pareto) return run_pareto(pareto_args);
    if (*correlate) return run_correlate(correlate_args);
    if (*select) return run_select(select_args);
    if (*synth) return run_synth(synth_args);
    if (*report) return run_report(report_args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ComputeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  }
  return kExitValidation;
}
