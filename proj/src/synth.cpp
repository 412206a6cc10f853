#include "fairaudit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "fairaudit/csv.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/io.hpp"
#include "fairaudit/parallel.hpp"
#include "fairaudit/probe.hpp"
#include "fairaudit/rng.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

namespace {

using ordered_json = nlohmann::ordered_json;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

/// Attribute-conditional signal shift in the target domain. Zero when the
/// domains share their shortcut correlation; at a full flip it counteracts
/// the largest shortcut weight in the grid.
double target_shift(const SynthConfig& c) {
  const double denom = 2.0 * std::max(std::abs(c.shortcut_corr_src), 0.05);
  const double ratio = std::clamp(
      (c.shortcut_corr_tar - c.shortcut_corr_src) / denom, -1.0, 1.0);
  const double lam_max =
      *std::max_element(c.lambda_grid.begin(), c.lambda_grid.end());
  return kSynthShiftGain * lam_max * ratio;
}

struct DomainSample {
  int y = 0;
  int a = 0;
  double signal = 0.0;     // w^T x (includes the target-domain group shift)
  double ambiguity = 0.0;  // zeta, shared across the scorer family
  double emb_noise = 0.0;  // e, shared across the scorer family
};

/// All randomness is drawn from per-sample counter streams, so the bundle is
/// a pure function of (config, seed) regardless of generation order.
std::vector<DomainSample> draw_domain(const SynthConfig& c, bool target) {
  const double rho = target ? c.shortcut_corr_tar : c.shortcut_corr_src;
  const double kappa = target ? target_shift(c) : 0.0;
  const double b = c.group_balance;
  const double swing = std::min(b, 1.0 - b);
  const double p_a1_y1 = b + rho * swing;
  const double p_a1_y0 = b - rho * swing;
  const double mu = c.signal_strength;
  const double u = 1.0 / std::sqrt(static_cast<double>(c.feature_dim));

  std::vector<DomainSample> samples(c.n_per_domain);
  parallel_for(c.n_per_domain, [&](std::size_t i) {
    CounterRng rng(c.seed, (target ? 2 : 1) * 0x100000000ull + i);
    DomainSample& s = samples[i];
    s.y = rng.next_bernoulli(c.prevalence) ? 1 : 0;
    s.a = rng.next_bernoulli(s.y ? p_a1_y1 : p_a1_y0) ? 1 : 0;
    // x = (2y-1)*mu*u + kappa*(2a-1)*u + noise; the scorer sees w^T x with
    // w = mu*u, so only the u-component of the noise survives.
    double noise_along_u = 0.0;
    for (std::size_t j = 0; j < c.feature_dim; ++j)
      noise_along_u += u * rng.next_gaussian();
    s.signal = mu * (mu * (2.0 * s.y - 1.0) + kappa * (2.0 * s.a - 1.0) +
                     noise_along_u);
    s.ambiguity = rng.next_gaussian();
    s.emb_noise = rng.next_gaussian();
  });
  return samples;
}

Split src_split_of(std::size_t i, std::size_t n) {
  if (i < n / 2) return Split::train;
  if (i < n / 2 + n / 4) return Split::val;
  return Split::test;
}

double scorer_margin(const DomainSample& s, double lambda) {
  return s.signal + lambda * (2.0 * s.a - 1.0) +
         kSynthAmbiguityGain * lambda * s.ambiguity;
}

std::string sample_id_of(bool target, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%06zu", target ? "tar" : "src", i);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_per_domain < 8)
    throw InvalidConfig("n_per_domain must be >= 8");
  if (feature_dim == 0) throw InvalidConfig("feature_dim must be >= 1");
  if (!(signal_strength >= 0.0) || !std::isfinite(signal_strength))
    throw InvalidConfig("signal_strength must be finite and >= 0");
  if (!(prevalence > 0.0 && prevalence < 1.0))
    throw InvalidConfig("prevalence must lie in (0,1)");
  if (!(group_balance > 0.0 && group_balance < 1.0))
    throw InvalidConfig("group_balance must lie in (0,1)");
  for (double rho : {shortcut_corr_src, shortcut_corr_tar})
    if (!(rho >= -1.0 && rho <= 1.0))
      throw InvalidConfig("shortcut correlations must lie in [-1,1]");
  if (lambda_grid.empty()) throw InvalidConfig("lambda_grid must be non-empty");
  std::set<double> seen;
  for (double lam : lambda_grid) {
    if (!(lam >= 0.0) || !std::isfinite(lam))
      throw InvalidConfig("lambda values must be finite and >= 0");
    if (!seen.insert(lam).second)
      throw InvalidConfig("lambda_grid has duplicate values");
  }
}

SynthConfig SynthConfig::from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidConfig(std::string("bad synth config JSON: ") + e.what());
  }
  if (!j.contains("seed"))
    throw InvalidConfig("synth config must set 'seed' explicitly");
  SynthConfig c;
  c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("n_per_domain")) c.n_per_domain = j["n_per_domain"].get<std::size_t>();
  if (j.contains("feature_dim")) c.feature_dim = j["feature_dim"].get<std::size_t>();
  if (j.contains("signal_strength")) c.signal_strength = j["signal_strength"].get<double>();
  if (j.contains("prevalence")) c.prevalence = j["prevalence"].get<double>();
  if (j.contains("group_balance")) c.group_balance = j["group_balance"].get<double>();
  if (j.contains("shortcut_corr_src")) c.shortcut_corr_src = j["shortcut_corr_src"].get<double>();
  if (j.contains("shortcut_corr_tar")) c.shortcut_corr_tar = j["shortcut_corr_tar"].get<double>();
  if (j.contains("lambda_grid")) c.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
  c.validate();
  return c;
}

std::string SynthConfig::to_json_text() const {
  ordered_json j;
  j["n_per_domain"] = n_per_domain;
  j["feature_dim"] = feature_dim;
  j["signal_strength"] = signal_strength;
  j["prevalence"] = prevalence;
  j["group_balance"] = group_balance;
  j["shortcut_corr_src"] = shortcut_corr_src;
  j["shortcut_corr_tar"] = shortcut_corr_tar;
  j["lambda_grid"] = lambda_grid;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

std::string synth_model_id(double lambda) {
  return "scorer_l" + format_fixed6(lambda);
}

double synth_expected_fpr(const SynthConfig& config, bool target_domain,
                          double lambda, int a, double threshold) {
  const double mu = config.signal_strength;
  const double kappa = target_domain ? target_shift(config) : 0.0;
  const double coef = mu * kappa + lambda;  // attribute coefficient of the margin
  const double sd = std::sqrt(mu * mu + kSynthAmbiguityGain * kSynthAmbiguityGain *
                                            lambda * lambda);
  const double l = logit(threshold);
  // margin | y=0, a  ~  Normal(-mu^2 + coef*(2a-1), sd^2)
  const double z = (coef * (2.0 * a - 1.0) - l - mu * mu) / sd;
  return normal_cdf(z);
}

SyntheticBundle generate_benchmark(const SynthConfig& config) {
  config.validate();
  SyntheticBundle bundle;
  bundle.config = config;

  std::vector<double> grid = config.lambda_grid;
  std::sort(grid.begin(), grid.end());

  const auto src = draw_domain(config, false);
  const auto tar = draw_domain(config, true);

  // ERM tag goes to the shortcut-free scorer when the grid has one,
  // otherwise to the median grid point.
  std::size_t erm_index = grid.size() / 2;
  for (std::size_t g = 0; g < grid.size(); ++g)
    if (grid[g] == 0.0) erm_index = g;

  const std::size_t n = config.n_per_domain;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double lambda = grid[g];
    const std::string model_id = synth_model_id(lambda);
    bundle.model_ids.push_back(model_id);

    std::vector<double> val_scores;
    std::vector<int> val_labels;
    for (std::size_t i = 0; i < n; ++i) {
      const DomainSample& s = src[i];
      PredictionRecord rec;
      rec.sample_id = sample_id_of(false, i);
      rec.model_id = model_id;
      rec.dataset_id = kSynthSrcDataset;
      rec.split = src_split_of(i, n);
      rec.score = logistic(scorer_margin(s, lambda));
      rec.label = s.y;
      rec.attributes[kSynthAttribute] = s.a ? "a1" : "a0";
      if (rec.split == Split::val) {
        val_scores.push_back(rec.score);
        val_labels.push_back(rec.label);
      }
      bundle.predictions.push_back(std::move(rec));

      EmbeddingRecord emb;
      emb.sample_id = sample_id_of(false, i);
      emb.model_id = model_id;
      emb.vector = {s.signal + kSynthAmbiguityGain * lambda * s.ambiguity,
                    lambda * (2.0 * s.a - 1.0) + s.emb_noise};
      bundle.embeddings.push_back(std::move(emb));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const DomainSample& s = tar[i];
      PredictionRecord rec;
      rec.sample_id = sample_id_of(true, i);
      rec.model_id = model_id;
      rec.dataset_id = kSynthTarDataset;
      rec.split = Split::test;
      rec.score = logistic(scorer_margin(s, lambda));
      rec.label = s.y;
      rec.attributes[kSynthAttribute] = s.a ? "a1" : "a0";
      bundle.predictions.push_back(std::move(rec));
    }

    ModelMeta meta;
    meta.model_id = model_id;
    meta.algorithm = g == erm_index ? "ERM" : "scorer";
    meta.task = kSynthTask;
    meta.tuned_attribute = kSynthAttribute;
    meta.seed = static_cast<long long>(config.seed);
    meta.hparams["lambda"] = format_fixed6(lambda);
    meta.hparams["ambiguity_gain"] = format_fixed6(kSynthAmbiguityGain);
    meta.val_auroc = auroc(val_scores, val_labels);
    bundle.registry.push_back(std::move(meta));
  }
  return bundle;
}

std::vector<std::string> write_bundle(const SyntheticBundle& bundle,
                                      const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir);

  std::vector<std::string> manifest;
  const auto emit = [&](const std::string& name, const std::string& content) {
    write_text_file(dir + "/" + name, content);
    manifest.push_back(name);
  };

  for (const auto& model_id : bundle.model_ids) {
    std::vector<PredictionRecord> src_rows, tar_rows;
    std::vector<EmbeddingRecord> emb_rows;
    for (const auto& r : bundle.predictions) {
      if (r.model_id != model_id) continue;
      (r.dataset_id == kSynthTarDataset ? tar_rows : src_rows).push_back(r);
    }
    for (const auto& e : bundle.embeddings)
      if (e.model_id == model_id) emb_rows.push_back(e);
    emit("pred_src_" + model_id + ".csv", serialize_predictions_csv(src_rows));
    emit("pred_tar_" + model_id + ".csv", serialize_predictions_csv(tar_rows));
    emit("emb_" + model_id + ".csv", serialize_embeddings_csv(emb_rows));
  }
  emit("registry.csv", serialize_registry_csv(bundle.registry));
  emit("config.json", bundle.config.to_json_text());
  return manifest;
}

SyntheticBundle load_bundle(const std::string& dir) {
  SyntheticBundle bundle;
  bundle.config = SynthConfig::from_json_text(read_text_file(dir + "/config.json"));
  bundle.registry = load_registry(dir + "/registry.csv");
  for (const auto& meta : bundle.registry) {
    bundle.model_ids.push_back(meta.model_id);
    for (const char* prefix : {"pred_src_", "pred_tar_"}) {
      auto rows = load_predictions(dir + "/" + prefix + meta.model_id + ".csv");
      bundle.predictions.insert(bundle.predictions.end(), rows.begin(), rows.end());
    }
    auto embs = load_embeddings(dir + "/emb_" + meta.model_id + ".csv");
    bundle.embeddings.insert(bundle.embeddings.end(), embs.begin(), embs.end());
  }
  return bundle;
}

namespace {

struct ProbeSplits {
  ProbeData train, val, test;
  std::vector<std::string> classes;
};

ProbeSplits assemble_probe_data(const SyntheticBundle& bundle,
                                const std::string& model_id) {
  std::map<std::string, std::pair<Split, std::string>> sample_info;
  for (const auto& r : bundle.predictions)
    if (r.model_id == model_id && r.dataset_id == kSynthSrcDataset)
      sample_info[r.sample_id] = {r.split, r.attributes.at(kSynthAttribute)};

  ProbeSplits out;
  std::set<std::string> class_set;
  for (const auto& [id, info] : sample_info) class_set.insert(info.second);
  out.classes.assign(class_set.begin(), class_set.end());
  std::map<std::string, int> class_index;
  for (std::size_t c = 0; c < out.classes.size(); ++c)
    class_index[out.classes[c]] = static_cast<int>(c);

  for (const auto& e : bundle.embeddings) {
    if (e.model_id != model_id) continue;
    auto it = sample_info.find(e.sample_id);
    if (it == sample_info.end()) continue;
    ProbeData* split = nullptr;
    switch (it->second.first) {
      case Split::train: split = &out.train; break;
      case Split::val: split = &out.val; break;
      case Split::test: split = &out.test; break;
    }
    if (split->dim == 0) split->dim = e.vector.size();
    split->x.insert(split->x.end(), e.vector.begin(), e.vector.end());
    split->y.push_back(class_index.at(it->second.second));
    ++split->n;
  }
  return out;
}

}  // namespace

ReferenceReport run_reference_pipeline(const SyntheticBundle& bundle,
                                       const ReferencePipelineOptions& options) {
  ReferenceReport report;
  report.config = bundle.config;
  report.threshold_mode = options.threshold_mode;
  report.ece_bins = options.ece_bins;

  const TaskPolarity polarity;  // underdiagnosis
  const RateMetric gap_metric = polarity.resolve(kSynthTask);
  const GroupPair pair{"a1", "a0"};
  const ThresholdPolicy policy = ThresholdPolicy::f1_max();
  const std::vector<double> l2_grid =
      options.probe_l2_grid.empty() ? default_l2_grid() : options.probe_l2_grid;

  std::map<std::string, const ModelMeta*> meta_by_id;
  for (const auto& m : bundle.registry) meta_by_id[m.model_id] = &m;

  std::vector<std::string> model_ids = bundle.model_ids;
  std::sort(model_ids.begin(), model_ids.end(),
            [&](const std::string& x, const std::string& y) {
              return std::stod(meta_by_id.at(x)->hparams.at("lambda")) <
                     std::stod(meta_by_id.at(y)->hparams.at("lambda"));
            });

  report.models.resize(model_ids.size());
  parallel_for(model_ids.size(), [&](std::size_t m) {
    const std::string& model_id = model_ids[m];
    const ModelMeta& meta = *meta_by_id.at(model_id);
    ReferenceModelRow row;
    row.model_id = model_id;
    row.lambda = std::stod(meta.hparams.at("lambda"));

    const auto src_val = build_frame(bundle.predictions, model_id,
                                     kSynthSrcDataset, Split::val, kSynthAttribute);
    const auto src_test = build_frame(bundle.predictions, model_id,
                                      kSynthSrcDataset, Split::test, kSynthAttribute);
    const auto tar_test = build_frame(bundle.predictions, model_id,
                                      kSynthTarDataset, Split::test, kSynthAttribute);

    row.val_auroc = meta.val_auroc
                        ? *meta.val_auroc
                        : auroc(src_val.frame.scores(), src_val.frame.labels());
    {
      const MetricSet val_metrics = group_metrics(src_val.frame, policy,
                                                  options.ece_bins);
      double worst = 1.0;
      for (const auto& g : val_metrics.groups)
        if (g.auroc) worst = std::min(worst, *g.auroc);
      row.worst_group_val_auroc = worst;
    }

    row.id_auroc = auroc(src_test.frame.scores(), src_test.frame.labels());
    const FairnessGap id_gap = fairness_gap(src_test.frame, pair, gap_metric, policy);
    row.id_signed_gap = id_gap.signed_gap;
    row.id_abs_gap = id_gap.abs_gap;

    const ThresholdPolicy tar_policy =
        options.threshold_mode == ThresholdMode::frozen_id
            ? ThresholdPolicy::fixed(id_gap.threshold)
            : policy;
    row.ood_auroc = auroc(tar_test.frame.scores(), tar_test.frame.labels());
    const FairnessGap ood_gap =
        fairness_gap(tar_test.frame, pair, gap_metric, tar_policy);
    row.ood_signed_gap = ood_gap.signed_gap;
    row.ood_abs_gap = ood_gap.abs_gap;

    const MetricSet id_metrics = group_metrics(src_test.frame, policy,
                                               options.ece_bins);
    row.ece_overall = ece(src_test.frame.scores(), src_test.frame.labels(),
                          options.ece_bins);
    double ece_g1 = 0.0, ece_g2 = 0.0, worst_error = 0.0;
    for (const auto& g : id_metrics.groups) {
      if (g.group == pair.g1) ece_g1 = g.ece;
      if (g.group == pair.g2) ece_g2 = g.ece;
      const double err = rate_value(g.counts, gap_metric);
      if (!std::isnan(err)) worst_error = std::max(worst_error, err);
    }
    row.ece_gap = std::abs(ece_g1 - ece_g2);
    row.worst_group_error = worst_error;

    row.decomposition = decompose_gap(src_test.frame, tar_test.frame, gap_metric,
                                      pair, policy, options.threshold_mode);

    const ProbeSplits probe_data = assemble_probe_data(bundle, model_id);
    const ProbeModel probe_model =
        fit_probe(probe_data.train, probe_data.val, probe_data.classes, l2_grid);
    const ProbeReport probe_report =
        evaluate_probe(probe_model, probe_data.val, probe_data.test);
    row.probe_macro_auroc = probe_report.macro_auroc_test;
    row.probe_accuracy = probe_report.argmax_accuracy_test;
    row.probe_selected_l2 = probe_report.selected_l2;

    report.models[m] = std::move(row);
  });

  std::vector<double> lambdas, probes, id_gaps;
  std::vector<TransferPoint> id_points, ood_points;
  std::vector<DualCoordinatePoint> dual_points;
  for (const auto& row : report.models) {
    lambdas.push_back(row.lambda);
    probes.push_back(row.probe_macro_auroc);
    id_gaps.push_back(row.id_abs_gap);
    id_points.push_back({row.model_id, row.id_auroc, row.id_abs_gap});
    ood_points.push_back({row.model_id, row.ood_auroc, row.ood_abs_gap});
    dual_points.push_back({row.model_id, row.id_auroc, row.id_abs_gap,
                           row.ood_auroc, row.ood_abs_gap});
  }
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  if (report.models.size() >= 2) {
    report.spearman_lambda_probe = spearman(lambdas, probes);
    report.spearman_lambda_id_gap = spearman(lambdas, id_gaps);
  } else {
    report.spearman_lambda_probe = kNaN;
    report.spearman_lambda_id_gap = kNaN;
  }
  if (report.models.size() >= 3) {
    report.transfer = transfer_correlation(id_points, ood_points);
  } else {
    report.transfer.n_models = 0;
    report.transfer.perf_correlation.r = kNaN;
    report.transfer.fairness_correlation.r = kNaN;
  }
  report.pareto = pareto_transfer(dual_points);

  std::vector<GridEntry> grid;
  for (const auto& row : report.models) {
    GridEntry e;
    e.model_id = row.model_id;
    e.algorithm = meta_by_id.at(row.model_id)->algorithm;
    e.val_auroc = row.val_auroc;
    e.metrics = {{"id_abs_gap", row.id_abs_gap},
                 {"probe_accuracy", row.probe_accuracy},
                 {"probe_macro_auroc", row.probe_macro_auroc},
                 {"val_auroc", row.val_auroc},
                 {"worst_group_val_auroc", row.worst_group_val_auroc},
                 {"ece_gap", row.ece_gap},
                 {"ece_overall", row.ece_overall},
                 {"worst_group_error", row.worst_group_error},
                 {"ood_abs_gap", row.ood_abs_gap}};
    grid.push_back(std::move(e));
  }
  report.cutoff = apply_cutoff(grid, CutoffRule::relative(0.95));

  BenchmarkSetting setting;
  setting.ood_dataset = kSynthTarDataset;
  setting.task = kSynthTask;
  setting.attribute = kSynthAttribute;
  setting.grid = report.cutoff.retained;
  report.benchmark = benchmark_criteria({setting}, default_criteria(),
                                        options.bootstrap_iter, options.seed);
  return report;
}

}  // namespace fairaudit
