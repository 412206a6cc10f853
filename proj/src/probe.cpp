#include "fairaudit/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairaudit/errors.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/parallel.hpp"

namespace fairaudit {

namespace {

// Weights are row-major K x (d+1); column d is the intercept.

void softmax_rows(std::vector<double>& logits, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    double* row = logits.data() + i * k;
    const double mx = *std::max_element(row, row + k);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (std::size_t c = 0; c < k; ++c) row[c] /= sum;
  }
}

std::vector<double> forward_logits(const ProbeData& data, std::size_t k,
                                   const std::vector<double>& w) {
  const std::size_t d = data.dim;
  std::vector<double> logits(data.n * k);
  for (std::size_t i = 0; i < data.n; ++i) {
    const double* xi = data.x.data() + i * d;
    for (std::size_t c = 0; c < k; ++c) {
      const double* wc = w.data() + c * (d + 1);
      double z = wc[d];
      for (std::size_t j = 0; j < d; ++j) z += wc[j] * xi[j];
      logits[i * k + c] = z;
    }
  }
  return logits;
}

struct ObjectiveEval {
  double value = 0.0;
  std::vector<double> grad;
};

// The optimizer works on the mean-scaled objective (sum form / n): same
// argmin, and the 1e-6 gradient tolerance then has a per-sample meaning.
double eval_value(const ProbeData& data, std::size_t k, double l2,
                  const std::vector<double>& w) {
  std::vector<double> probs = forward_logits(data, k, w);
  softmax_rows(probs, data.n, k);
  double value = 0.0;
  for (std::size_t i = 0; i < data.n; ++i)
    value -= std::log(std::max(probs[i * k + data.y[i]], 1e-300));
  const std::size_t d = data.dim;
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < d; ++j) {
      const double wj = w[c * (d + 1) + j];
      value += 0.5 * l2 * wj * wj;
    }
  return value / static_cast<double>(data.n);
}

ObjectiveEval eval_objective(const ProbeData& data, std::size_t k, double l2,
                             const std::vector<double>& w) {
  const std::size_t d = data.dim;
  std::vector<double> probs = forward_logits(data, k, w);
  softmax_rows(probs, data.n, k);

  ObjectiveEval out;
  out.grad.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < data.n; ++i) {
    const double* pi = probs.data() + i * k;
    const double py = std::max(pi[data.y[i]], 1e-300);
    out.value -= std::log(py);
    const double* xi = data.x.data() + i * d;
    for (std::size_t c = 0; c < k; ++c) {
      const double delta = pi[c] - (static_cast<int>(c) == data.y[i] ? 1.0 : 0.0);
      double* gc = out.grad.data() + c * (d + 1);
      for (std::size_t j = 0; j < d; ++j) gc[j] += delta * xi[j];
      gc[d] += delta;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    const double* wc = w.data() + c * (d + 1);
    double* gc = out.grad.data() + c * (d + 1);
    for (std::size_t j = 0; j < d; ++j) {  // intercept unpenalized
      out.value += 0.5 * l2 * wc[j] * wc[j];
      gc[j] += l2 * wc[j];
    }
  }
  const double invn = 1.0 / static_cast<double>(data.n);
  out.value *= invn;
  for (double& g : out.grad) g *= invn;
  return out;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

constexpr double kGradTol = 1e-6;
constexpr std::size_t kMaxIter = 1000;

/// L-BFGS (m=10) with Armijo backtracking; deterministic from zero init.
void minimize(const ProbeData& data, std::size_t k, double l2, ProbeModel& model) {
  const std::size_t dim = k * (data.dim + 1);
  std::vector<double> w(dim, 0.0);
  ObjectiveEval cur = eval_objective(data, k, l2, w);

  constexpr std::size_t kHistory = 10;
  std::vector<std::vector<double>> s_hist, y_hist;
  std::vector<double> rho_hist;

  model.converged = false;
  std::size_t iter = 0;
  for (; iter < kMaxIter; ++iter) {
    if (inf_norm(cur.grad) <= kGradTol) {
      model.converged = true;
      break;
    }
    // Two-loop recursion.
    std::vector<double> q = cur.grad;
    const std::size_t h = s_hist.size();
    std::vector<double> alpha(h);
    for (std::size_t idx = h; idx-- > 0;) {
      alpha[idx] = rho_hist[idx] * dot(s_hist[idx], q);
      for (std::size_t j = 0; j < dim; ++j) q[j] -= alpha[idx] * y_hist[idx][j];
    }
    if (h > 0) {
      const double gamma = dot(s_hist.back(), y_hist.back()) /
                           std::max(dot(y_hist.back(), y_hist.back()), 1e-300);
      for (double& x : q) x *= gamma;
    }
    for (std::size_t idx = 0; idx < h; ++idx) {
      const double beta = rho_hist[idx] * dot(y_hist[idx], q);
      for (std::size_t j = 0; j < dim; ++j)
        q[j] += (alpha[idx] - beta) * s_hist[idx][j];
    }
    // q is the descent direction (to be subtracted).
    double dir_dot_grad = dot(q, cur.grad);
    if (dir_dot_grad <= 0.0) {  // fall back to steepest descent
      q = cur.grad;
      dir_dot_grad = dot(q, q);
    }

    double step = 1.0;
    constexpr double kArmijo = 1e-4;
    std::vector<double> w_new(dim);
    ObjectiveEval next;
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < dim; ++j) w_new[j] = w[j] - step * q[j];
      next = eval_objective(data, k, l2, w_new);
      if (next.value <= cur.value - kArmijo * step * dir_dot_grad) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;  // no progress possible at double precision

    std::vector<double> s(dim), yv(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      s[j] = w_new[j] - w[j];
      yv[j] = next.grad[j] - cur.grad[j];
    }
    const double sy = dot(s, yv);
    if (sy > 1e-12) {
      if (s_hist.size() == kHistory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
    }
    w = std::move(w_new);
    cur = std::move(next);
  }
  if (iter == kMaxIter && inf_norm(cur.grad) <= kGradTol) model.converged = true;
  model.weights = std::move(w);
  model.iterations = iter;
}

}  // namespace

std::vector<double> default_l2_grid(std::size_t points, double lo, double hi) {
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  const double llo = std::log10(lo), lhi = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) /
                                 static_cast<double>(points - 1));
  return grid;
}

double probe_objective(const ProbeData& train_standardized, std::size_t num_classes,
                       double l2_strength, const std::vector<double>& weights) {
  std::vector<double> probs =
      forward_logits(train_standardized, num_classes, weights);
  softmax_rows(probs, train_standardized.n, num_classes);
  double value = 0.0;
  for (std::size_t i = 0; i < train_standardized.n; ++i) {
    const double py = std::max(
        probs[i * num_classes + train_standardized.y[i]], 1e-300);
    value -= std::log(py);
  }
  const std::size_t d = train_standardized.dim;
  for (std::size_t c = 0; c < num_classes; ++c)
    for (std::size_t j = 0; j < d; ++j) {
      const double wj = weights[c * (d + 1) + j];
      value += 0.5 * l2_strength * wj * wj;
    }
  return value;
}

ProbeData standardize_with(const ProbeModel& model, const ProbeData& raw) {
  if (raw.dim != model.dim)
    throw DimensionMismatch("probe expects dim " + std::to_string(model.dim) +
                            ", got " + std::to_string(raw.dim));
  ProbeData out = raw;
  for (std::size_t i = 0; i < out.n; ++i)
    for (std::size_t j = 0; j < out.dim; ++j)
      out.x[i * out.dim + j] =
          (out.x[i * out.dim + j] - model.feature_mean[j]) / model.feature_scale[j];
  return out;
}

ProbeModel fit_probe_single(const ProbeData& train,
                            const std::vector<std::string>& classes,
                            double l2_strength) {
  ProbeModel model;
  model.num_classes = classes.size();
  model.dim = train.dim;
  model.classes = classes;
  model.l2_strength = l2_strength;

  // Per-dimension standardization from the training split.
  model.feature_mean.assign(train.dim, 0.0);
  model.feature_scale.assign(train.dim, 1.0);
  for (std::size_t j = 0; j < train.dim; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < train.n; ++i) s += train.at(i, j);
    model.feature_mean[j] = s / static_cast<double>(train.n);
  }
  for (std::size_t j = 0; j < train.dim; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < train.n; ++i) {
      const double d = train.at(i, j) - model.feature_mean[j];
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(train.n));
    model.feature_scale[j] = sd > 1e-12 ? sd : 1.0;
  }

  const ProbeData std_train = standardize_with(model, train);
  minimize(std_train, model.num_classes, l2_strength, model);
  for (double wv : model.weights)
    if (!std::isfinite(wv))
      throw NonFiniteEntry("probe fit produced non-finite weights");
  return model;
}

ProbeModel fit_probe(const ProbeData& train, const ProbeData& val,
                     const std::vector<std::string>& classes,
                     const std::vector<double>& l2_grid) {
  if (classes.size() < 2)
    throw SingleClassTrain("probe training needs >= 2 classes, got " +
                           std::to_string(classes.size()));
  if (l2_grid.empty()) throw InvalidConfig("empty l2 grid");
  {
    std::vector<bool> present(classes.size(), false);
    for (int y : train.y) present[static_cast<std::size_t>(y)] = true;
    if (std::count(present.begin(), present.end(), true) < 2)
      throw SingleClassTrain("training split holds a single class");
  }

  std::vector<ProbeModel> fits(l2_grid.size());
  std::vector<double> val_scores(l2_grid.size());
  parallel_for(l2_grid.size(), [&](std::size_t g) {
    fits[g] = fit_probe_single(train, classes, l2_grid[g]);
    val_scores[g] = macro_auroc(fits[g], val);
  });

  // Best validation macro AUROC; ties resolve toward larger l2.
  std::size_t best = 0;
  for (std::size_t g = 1; g < l2_grid.size(); ++g)
    if (val_scores[g] >= val_scores[best]) best = g;
  return std::move(fits[best]);
}

std::vector<double> ProbeModel::predict_proba(const ProbeData& data) const {
  const ProbeData std_data = standardize_with(*this, data);
  std::vector<double> probs = forward_logits(std_data, num_classes, weights);
  softmax_rows(probs, std_data.n, num_classes);
  return probs;
}

double macro_auroc(const ProbeModel& model, const ProbeData& data) {
  const std::vector<double> probs = model.predict_proba(data);
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < model.num_classes; ++c) {
    std::size_t pos = 0;
    std::vector<double> scores(data.n);
    std::vector<int> labels(data.n);
    for (std::size_t i = 0; i < data.n; ++i) {
      scores[i] = probs[i * model.num_classes + c];
      labels[i] = data.y[i] == static_cast<int>(c) ? 1 : 0;
      pos += labels[i];
    }
    if (pos == 0 || pos == data.n) continue;  // one-vs-rest undefined
    sum += auroc(scores, labels);
    ++counted;
  }
  if (counted == 0)
    throw DegenerateLabels("macro AUROC undefined: no class has both polarities");
  return sum / static_cast<double>(counted);
}

ProbeReport evaluate_probe(const ProbeModel& model, const ProbeData& val,
                           const ProbeData& test) {
  ProbeReport report;
  report.classes = model.classes;
  report.selected_l2 = model.l2_strength;
  report.converged = model.converged;
  if (!model.converged)
    report.warnings.push_back("NonConvergence: gradient tolerance not reached in " +
                              std::to_string(model.iterations) + " iterations");

  report.macro_auroc_val = macro_auroc(model, val);
  report.macro_auroc_test = macro_auroc(model, test);

  const std::vector<double> probs = model.predict_proba(test);
  report.per_class_auroc_test.assign(model.num_classes, std::nullopt);
  for (std::size_t c = 0; c < model.num_classes; ++c) {
    std::size_t pos = 0;
    std::vector<double> scores(test.n);
    std::vector<int> labels(test.n);
    for (std::size_t i = 0; i < test.n; ++i) {
      scores[i] = probs[i * model.num_classes + c];
      labels[i] = test.y[i] == static_cast<int>(c) ? 1 : 0;
      pos += labels[i];
    }
    if (pos == 0 || pos == test.n) continue;
    report.per_class_auroc_test[c] = auroc(scores, labels);
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.n; ++i) {
    std::size_t argmax = 0;
    for (std::size_t c = 1; c < model.num_classes; ++c)
      if (probs[i * model.num_classes + c] > probs[i * model.num_classes + argmax])
        argmax = c;
    if (static_cast<int>(argmax) == test.y[i]) ++correct;
  }
  report.argmax_accuracy_test =
      test.n ? static_cast<double>(correct) / static_cast<double>(test.n) : 0.0;
  return report;
}

}  // namespace fairaudit
