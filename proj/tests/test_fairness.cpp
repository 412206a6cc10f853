#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "fairaudit/errors.hpp"
#include "fairaudit/fairness.hpp"
#include "fairaudit/rng.hpp"

using namespace fairaudit;

namespace {

EvaluationFrame make_frame(const std::vector<double>& scores,
                           const std::vector<int>& labels,
                           const std::vector<std::string>& groups) {
  EvaluationFrame frame;
  frame.model_id = "m";
  frame.dataset_id = "d";
  frame.split = Split::test;
  frame.attribute = "g";
  std::set<std::string> universe;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    PredictionRecord r;
    r.sample_id = "s" + std::to_string(i);
    r.model_id = "m";
    r.dataset_id = "d";
    r.split = Split::test;
    r.score = scores[i];
    r.label = labels[i];
    r.attributes["g"] = groups[i];
    universe.insert(groups[i]);
    frame.records.push_back(std::move(r));
  }
  frame.group_universe.assign(universe.begin(), universe.end());
  return frame;
}

/// Frame with planted per-group FPRs: negatives score 0.75 with probability
/// fpr (flagged at threshold 0.5), otherwise 0.25.
EvaluationFrame planted_fpr_frame(std::size_t n_per_group, double fpr_a,
                                  double fpr_b, std::uint64_t seed) {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<std::string> groups;
  CounterRng rng(seed, 0);
  for (int g = 0; g < 2; ++g) {
    const double fpr = g == 0 ? fpr_a : fpr_b;
    for (std::size_t i = 0; i < n_per_group; ++i) {
      const bool positive = rng.next_bernoulli(0.4);
      double score;
      if (positive)
        score = rng.next_bernoulli(0.9) ? 0.75 : 0.25;
      else
        score = rng.next_bernoulli(fpr) ? 0.75 : 0.25;
      scores.push_back(score);
      labels.push_back(positive ? 1 : 0);
      groups.push_back(g == 0 ? "a" : "b");
    }
  }
  return make_frame(scores, labels, groups);
}

}  // namespace

TEST_CASE("group_metrics: perfect group vs chance group") {
  // group a perfectly separated, group b all ties at 0.5
  const auto frame = make_frame(
      {0.9, 0.95, 0.1, 0.05, 0.5, 0.5, 0.5, 0.5},
      {1, 1, 0, 0, 1, 0, 1, 0},
      {"a", "a", "a", "a", "b", "b", "b", "b"});
  const auto ms = group_metrics(frame, ThresholdPolicy::fixed(0.5));
  REQUIRE(ms.groups.size() == 2);
  CHECK(ms.groups[0].auroc.value() == doctest::Approx(1.0));
  CHECK(ms.groups[1].auroc.value() == doctest::Approx(0.5));
  CHECK(ms.groups[0].n == 4);
}

TEST_CASE("group_metrics: single-group frame") {
  const auto frame =
      make_frame({0.9, 0.1}, {1, 0}, {"only", "only"});
  const auto ms = group_metrics(frame, ThresholdPolicy::f1_max());
  CHECK(ms.groups.size() == 1);
  CHECK(ms.groups[0].group == "only");
}

TEST_CASE("group_metrics: planted FPRs measured within 0.01 at n=1e5") {
  const auto frame = planted_fpr_frame(100000, 0.2, 0.1, 404);
  const auto ms = group_metrics(frame, ThresholdPolicy::fixed(0.5));
  REQUIRE(ms.groups.size() == 2);
  CHECK(std::abs(ms.groups[0].counts.fpr() - 0.2) < 0.01);
  CHECK(std::abs(ms.groups[1].counts.fpr() - 0.1) < 0.01);
}

TEST_CASE("shared threshold: group confusions sum to the frame confusion") {
  const auto frame = planted_fpr_frame(500, 0.3, 0.1, 17);
  const auto ms = group_metrics(frame, ThresholdPolicy::f1_max());
  const auto whole =
      rates_at_threshold(frame.scores(), frame.labels(), ms.threshold);
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& g : ms.groups) {
    tp += g.counts.tp;
    fp += g.counts.fp;
    tn += g.counts.tn;
    fn += g.counts.fn;
  }
  CHECK(tp == whole.tp);
  CHECK(fp == whole.fp);
  CHECK(tn == whole.tn);
  CHECK(fn == whole.fn);
}

TEST_CASE("fairness_gap subtraction, antisymmetry, null case") {
  const auto frame = planted_fpr_frame(20000, 0.3, 0.1, 99);
  const GroupPair ab{"a", "b"};
  const GroupPair ba{"b", "a"};
  const auto gap =
      fairness_gap(frame, ab, RateMetric::fpr, ThresholdPolicy::fixed(0.5));
  CHECK(gap.signed_gap == doctest::Approx(0.2).epsilon(0.1));
  const auto swapped =
      fairness_gap(frame, ba, RateMetric::fpr, ThresholdPolicy::fixed(0.5));
  CHECK(swapped.signed_gap == doctest::Approx(-gap.signed_gap).epsilon(1e-15));
  CHECK(swapped.abs_gap == gap.abs_gap);

  const auto null_frame = planted_fpr_frame(10000, 0.2, 0.2, 7);
  const auto null_gap =
      fairness_gap(null_frame, ab, RateMetric::fpr, ThresholdPolicy::fixed(0.5));
  CHECK(std::abs(null_gap.signed_gap) < 0.02);
}

TEST_CASE("fairness_gap requires the conditioning class in both groups") {
  // group b has no negatives
  const auto frame = make_frame({0.9, 0.1, 0.8, 0.7}, {1, 0, 1, 1},
                                {"a", "a", "b", "b"});
  CHECK_THROWS_AS(fairness_gap(frame, {"a", "b"}, RateMetric::fpr,
                               ThresholdPolicy::fixed(0.5)),
                  MissingClassInGroup);
  CHECK_NOTHROW(fairness_gap(frame, {"a", "b"}, RateMetric::fnr,
                             ThresholdPolicy::fixed(0.5)));
}

TEST_CASE("task polarity resolution and over/under complementarity") {
  const TaskPolarity under{TaskPolarity::Mode::underdiagnosis};
  const TaskPolarity over{TaskPolarity::Mode::overdiagnosis};
  CHECK(under.resolve("No Finding") == RateMetric::fpr);
  CHECK(under.resolve("Effusion") == RateMetric::fnr);
  CHECK(over.resolve("No Finding") == RateMetric::fnr);
  CHECK(over.resolve("Pneumothorax") == RateMetric::fpr);

  // both polarities read complementary rates of the same confusions
  const auto frame = planted_fpr_frame(2000, 0.3, 0.1, 5);
  const auto policy = ThresholdPolicy::fixed(0.5);
  const auto fpr_gap = fairness_gap(frame, {"a", "b"}, RateMetric::fpr, policy);
  const auto tnr_gap = fairness_gap(frame, {"a", "b"}, RateMetric::tnr, policy);
  CHECK(fpr_gap.value_g1 == doctest::Approx(1.0 - tnr_gap.value_g1).epsilon(1e-15));
  CHECK(fpr_gap.signed_gap == doctest::Approx(-tnr_gap.signed_gap).epsilon(1e-15));
  const auto fnr_gap = fairness_gap(frame, {"a", "b"}, RateMetric::fnr, policy);
  const auto tpr_gap = fairness_gap(frame, {"a", "b"}, RateMetric::tpr, policy);
  CHECK(fnr_gap.signed_gap == doctest::Approx(-tpr_gap.signed_gap).epsilon(1e-15));
}

TEST_CASE("pareto_front worked examples") {
  const std::vector<ParetoPoint> points{
      {"p1", 0.90, 0.20}, {"p2", 0.85, 0.10}, {"p3", 0.80, 0.15}};
  const auto front = pareto_front(points);
  REQUIRE(front.size() == 2);
  CHECK(front[0].model_id == "p1");
  CHECK(front[1].model_id == "p2");

  const auto single = pareto_front({{"only", 0.5, 0.5}});
  CHECK(single.size() == 1);

  const std::vector<ParetoPoint> equal{
      {"x", 0.7, 0.1}, {"y", 0.7, 0.1}, {"z", 0.7, 0.1}};
  CHECK(pareto_front(equal).size() == 3);
}

TEST_CASE("pareto_front equals brute-force dominance on random grids") {
  CounterRng rng(55, 0);
  for (int it = 0; it < 60; ++it) {
    const std::size_t n = 1 + rng.next_below(200);
    std::vector<ParetoPoint> points(n);
    for (std::size_t i = 0; i < n; ++i) {
      points[i].model_id = "m" + std::to_string(i);
      points[i].performance = std::floor(rng.next_double() * 20.0) / 20.0;
      points[i].gap = std::floor(rng.next_double() * 20.0) / 20.0;
    }
    std::set<std::string> brute;
    for (const auto& p : points) {
      bool dominated = false;
      for (const auto& q : points)
        if (dominates(q, p)) dominated = true;
      if (!dominated) brute.insert(p.model_id);
    }
    const auto front = pareto_front(points);
    std::set<std::string> mine;
    for (const auto& p : front) mine.insert(p.model_id);
    CHECK(mine == brute);
    for (std::size_t i = 1; i < front.size(); ++i)
      CHECK(front[i - 1].performance >= front[i].performance);
  }
}

TEST_CASE("tradeoff_correlation filter and extremes") {
  std::vector<GridEntry> grid;
  for (int i = 0; i < 6; ++i) {
    GridEntry e;
    e.model_id = "m" + std::to_string(i);
    e.val_auroc = i == 5 ? 0.55 : 0.9;  // one model filtered out
    const double x = 0.1 * i;
    e.metrics["x"] = x;
    e.metrics["y"] = x;
    e.metrics["yneg"] = -x;
    // the filtered model would wreck the correlation if included
    if (i == 5) e.metrics["y"] = -10.0;
    grid.push_back(std::move(e));
  }
  CHECK(tradeoff_correlation(grid, "x", "y", 0.7).r == doctest::Approx(1.0));
  CHECK(tradeoff_correlation(grid, "x", "yneg", 0.7).r == doctest::Approx(-1.0));

  std::vector<GridEntry> tiny(grid.begin(), grid.begin() + 2);
  CHECK_THROWS_AS(tradeoff_correlation(tiny, "x", "y", 0.7), TooFewModels);
}
