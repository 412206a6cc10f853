#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairaudit/errors.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/rng.hpp"

using namespace fairaudit;

namespace {

// Independent O(n^2) pair-counting oracle.
double auroc_pair_counting(const std::vector<double>& scores,
                           const std::vector<int>& labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

struct RandomInstance {
  std::vector<double> scores;
  std::vector<int> labels;
};

RandomInstance random_instance(CounterRng& rng, std::size_t max_n,
                               bool with_ties) {
  RandomInstance inst;
  const std::size_t n = 2 + rng.next_below(max_n - 1);
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    double s = rng.next_double();
    if (with_ties) s = std::floor(s * 8.0) / 8.0;  // heavy ties
    const int y = rng.next_bernoulli(0.5) ? 1 : 0;
    inst.scores.push_back(s);
    inst.labels.push_back(y);
    (y ? has_pos : has_neg) = true;
  }
  if (!has_pos) inst.labels[0] = 1;
  if (!has_neg) inst.labels[inst.labels.size() - 1] = 0;
  return inst;
}

}  // namespace

TEST_CASE("auroc worked examples") {
  CHECK(auroc(std::vector<double>{0.1, 0.4, 0.35, 0.8},
              std::vector<int>{0, 0, 1, 1}) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(auroc(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 1}) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9},
              std::vector<int>{0, 0, 1, 1}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}),
                  DegenerateLabels);
}

TEST_CASE("auroc equals pair counting on random instances with ties") {
  CounterRng rng(2024, 0);
  for (int it = 0; it < 300; ++it) {
    const auto inst = random_instance(rng, 50, it % 2 == 0);
    CHECK(auroc(inst.scores, inst.labels) ==
          doctest::Approx(auroc_pair_counting(inst.scores, inst.labels))
              .epsilon(1e-12));
  }
}

TEST_CASE("auroc invariant under strictly increasing transforms") {
  CounterRng rng(7, 1);
  for (int it = 0; it < 50; ++it) {
    const auto inst = random_instance(rng, 40, true);
    const double base = auroc(inst.scores, inst.labels);
    const double a = 0.2 + rng.next_double();
    const double b = rng.next_double();
    std::vector<double> mapped(inst.scores.size());
    for (std::size_t i = 0; i < mapped.size(); ++i)
      mapped[i] = std::exp(a * inst.scores[i]) + b;  // strictly increasing
    CHECK(auroc(mapped, inst.labels) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("auroc with flipped labels complements for tie-free scores") {
  CounterRng rng(99, 2);
  for (int it = 0; it < 50; ++it) {
    auto inst = random_instance(rng, 30, false);
    // enforce distinct scores
    std::sort(inst.scores.begin(), inst.scores.end());
    for (std::size_t i = 1; i < inst.scores.size(); ++i)
      if (inst.scores[i] <= inst.scores[i - 1])
        inst.scores[i] = inst.scores[i - 1] + 1e-6;
    std::vector<int> flipped(inst.labels.size());
    for (std::size_t i = 0; i < flipped.size(); ++i) flipped[i] = 1 - inst.labels[i];
    CHECK(auroc(inst.scores, inst.labels) + auroc(inst.scores, flipped) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rates_at_threshold worked examples") {
  // tp=3 fn=1 fp=2 tn=4 built directly from the rule
  const std::vector<double> s{0.9, 0.8, 0.7, 0.2, 0.6, 0.9, 0.1, 0.2, 0.3, 0.4};
  const std::vector<int> y{1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const auto c = rates_at_threshold(s, y, 0.5);
  CHECK(c.tp == 3);
  CHECK(c.fn == 1);
  CHECK(c.fp == 2);
  CHECK(c.tn == 4);
  CHECK(c.tpr() == doctest::Approx(0.75));
  CHECK(c.fpr() == doctest::Approx(1.0 / 3.0));

  const auto all_pos = rates_at_threshold(s, y, 0.0);
  CHECK(all_pos.fn == 0);
  CHECK(all_pos.tn == 0);

  const auto c2 = rates_at_threshold(std::vector<double>{0.2, 0.6, 0.8},
                                     std::vector<int>{0, 1, 1}, 0.5);
  CHECK(c2.tp == 2);
  CHECK(c2.fp == 0);
  CHECK(c2.tn == 1);
  CHECK(c2.fn == 0);
}

TEST_CASE("confusion counts partition the sample count") {
  CounterRng rng(5, 3);
  for (int it = 0; it < 100; ++it) {
    const auto inst = random_instance(rng, 60, true);
    const double t = rng.next_double();
    const auto c = rates_at_threshold(inst.scores, inst.labels, t);
    CHECK(c.total() == inst.scores.size());
    for (double r : {c.tpr(), c.tnr(), c.fpr(), c.fnr()})
      if (!std::isnan(r)) {
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
      }
  }
}

TEST_CASE("select_f1_threshold worked examples") {
  CHECK(select_f1_threshold(std::vector<double>{0.2, 0.6, 0.8},
                            std::vector<int>{0, 1, 1}) ==
        doctest::Approx(0.4).epsilon(1e-12));
  CHECK(select_f1_threshold(std::vector<double>{0.3, 0.9},
                            std::vector<int>{1, 1}) == doctest::Approx(0.0));
  CHECK(select_f1_threshold(std::vector<double>{0.7}, std::vector<int>{1}) ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(
      select_f1_threshold(std::vector<double>{0.7}, std::vector<int>{0}),
      DegenerateLabels);
}

TEST_CASE("select_f1_threshold beats every candidate threshold") {
  CounterRng rng(11, 4);
  for (int it = 0; it < 200; ++it) {
    auto inst = random_instance(rng, 40, true);
    if (std::none_of(inst.labels.begin(), inst.labels.end(),
                     [](int y) { return y == 1; }))
      inst.labels[0] = 1;
    const double chosen = select_f1_threshold(inst.scores, inst.labels);
    const double chosen_f1 =
        rates_at_threshold(inst.scores, inst.labels, chosen).f1();

    std::vector<double> distinct(inst.scores);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> candidates{0.0, 1.0};
    for (std::size_t i = 1; i < distinct.size(); ++i)
      candidates.push_back(0.5 * (distinct[i - 1] + distinct[i]));
    std::sort(candidates.begin(), candidates.end());

    double best = -1.0, best_t = 0.0;
    for (double t : candidates) {
      const double f1 = rates_at_threshold(inst.scores, inst.labels, t).f1();
      if (f1 > best) {
        best = f1;
        best_t = t;
      }
    }
    CHECK(chosen_f1 == doctest::Approx(best).epsilon(1e-12));
    CHECK(chosen == doctest::Approx(best_t).epsilon(1e-12));
  }
}

TEST_CASE("ece worked examples") {
  CHECK(ece(std::vector<double>{0.8, 0.8, 0.8, 0.8, 0.2},
            std::vector<int>{1, 1, 1, 0, 0}, 10) ==
        doctest::Approx(0.08).epsilon(1e-12));
  // per-bin calibrated: bin [0.2,0.3) holds 4 samples at 0.25 with 1 positive
  CHECK(ece(std::vector<double>{0.25, 0.25, 0.25, 0.25},
            std::vector<int>{1, 0, 0, 0}, 10) == doctest::Approx(0.0));
  CHECK(ece(std::vector<double>{1.0, 1.0, 1.0}, std::vector<int>{0, 0, 0}, 10) ==
        doctest::Approx(1.0));
}

TEST_CASE("ece with one bin reduces to |mean score - mean label|") {
  CounterRng rng(13, 5);
  for (int it = 0; it < 100; ++it) {
    const auto inst = random_instance(rng, 50, false);
    double ms = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < inst.scores.size(); ++i) {
      ms += inst.scores[i];
      ml += inst.labels[i];
    }
    ms /= static_cast<double>(inst.scores.size());
    ml /= static_cast<double>(inst.scores.size());
    CHECK(ece(inst.scores, inst.labels, 1) ==
          doctest::Approx(std::abs(ms - ml)).epsilon(1e-12));
  }
}

TEST_CASE("average_precision worked examples") {
  CHECK(average_precision(std::vector<double>{0.9, 0.8, 0.7},
                          std::vector<int>{1, 0, 1}) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(average_precision(std::vector<double>{0.9, 0.8, 0.2, 0.1},
                          std::vector<int>{1, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(average_precision(std::vector<double>{0.9, 0.8, 0.7, 0.1},
                          std::vector<int>{0, 0, 0, 1}) == doctest::Approx(0.25));
  CHECK_THROWS_AS(average_precision(std::vector<double>{0.5},
                                    std::vector<int>{0}),
                  DegenerateLabels);
}

TEST_CASE("average_precision equals prefix enumeration with grouped ties") {
  CounterRng rng(17, 6);
  for (int it = 0; it < 100; ++it) {
    auto inst = random_instance(rng, 40, true);
    if (std::none_of(inst.labels.begin(), inst.labels.end(),
                     [](int y) { return y == 1; }))
      inst.labels[0] = 1;
    // oracle: walk distinct scores descending, accumulate
    std::vector<double> distinct(inst.scores);
    std::sort(distinct.begin(), distinct.end(), std::greater<>());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::size_t n_pos = 0;
    for (int y : inst.labels) n_pos += (y != 0);
    double ap = 0.0, prev_recall = 0.0;
    std::size_t tp = 0, total = 0;
    for (double s : distinct) {
      for (std::size_t i = 0; i < inst.scores.size(); ++i)
        if (inst.scores[i] == s) {
          ++total;
          tp += (inst.labels[i] != 0);
        }
      const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
      const double precision =
          static_cast<double>(tp) / static_cast<double>(total);
      ap += (recall - prev_recall) * precision;
      prev_recall = recall;
    }
    CHECK(average_precision(inst.scores, inst.labels) ==
          doctest::Approx(ap).epsilon(1e-12));
  }
}
