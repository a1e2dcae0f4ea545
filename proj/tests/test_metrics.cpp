#include <doctest.h>

#include <algorithm>

#include <rbal/errors.hpp>
#include <rbal/metrics.hpp>
#include <rbal/rng.hpp>

using namespace rbal;

namespace {

CampaignResult make_run(const std::vector<double>& accuracy,
                        const std::vector<int>& query_indices) {
  CampaignResult run;
  run.decision_accuracy = accuracy;
  run.macro_f1 = accuracy;
  run.query_count = static_cast<int>(accuracy.size()) - 1;
  run.query_pool_indices = query_indices;
  run.class_proportions = Mat::Constant(accuracy.size(), 4, 0.25);
  return run;
}

}  // namespace

TEST_CASE("decision accuracy basics") {
  CHECK(decision_accuracy({1, 0, 1}, {1, 0, 1}) == 1.0);
  CHECK(decision_accuracy({1, 0, 1, 0}, {1, 0, 1, 1}) == 0.75);
  CHECK_THROWS_AS(decision_accuracy({}, {}), DataError);
  CHECK_THROWS_AS(decision_accuracy({1}, {1, 0}), DimensionError);
}

TEST_CASE("decision accuracy matches an independent recount") {
  Rng rng(1);
  std::vector<int> chosen;
  std::vector<int> optimal;
  for (int i = 0; i < 100; ++i) {
    chosen.push_back(static_cast<int>(rng.below(2)));
    optimal.push_back(static_cast<int>(rng.below(2)));
  }
  // Second implementation of the comparison.
  int matches = 0;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    matches += chosen[i] == optimal[i] ? 1 : 0;
  }
  CHECK(decision_accuracy(chosen, optimal) == doctest::Approx(matches / 100.0));
}

TEST_CASE("macro f1 of perfect predictions is one") {
  CHECK(macro_f1({1, 2, 3, 4}, {1, 2, 3, 4}, 4) == 1.0);
}

TEST_CASE("absent and never-predicted class contributes zero") {
  // Class 4 never appears: P and R both have zero denominators.
  const double value = macro_f1({1, 2, 3}, {1, 2, 3}, 4);
  CHECK(value == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("macro f1 against a hand-computed confusion matrix") {
  const std::vector<int> predicted = {1, 1, 2, 2, 3, 4, 4, 4};
  const std::vector<int> truth = {1, 2, 2, 3, 3, 4, 4, 3};
  // class 1: P=1/2 R=1   -> 2/3
  // class 2: P=1/2 R=1/2 -> 1/2
  // class 3: P=1   R=1/3 -> 1/2
  // class 4: P=2/3 R=1   -> 4/5
  const double expected = (2.0 / 3.0 + 0.5 + 0.5 + 0.8) / 4.0;
  CHECK(macro_f1(predicted, truth, 4) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("metric ranges") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> predicted;
    std::vector<int> truth;
    for (int i = 0; i < 30; ++i) {
      predicted.push_back(1 + static_cast<int>(rng.below(4)));
      truth.push_back(1 + static_cast<int>(rng.below(4)));
    }
    const double f1 = macro_f1(predicted, truth, 4);
    CHECK(f1 >= 0.0);
    CHECK(f1 <= 1.0);
  }
}

TEST_CASE("aggregate of a single run reproduces the run with zero IQR") {
  const CampaignResult run = make_run({0.5, 0.6, 0.7}, {3, 8});
  const RunAggregate agg = aggregate_runs({run});
  CHECK(agg.track_length == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(agg.decision_accuracy.median[i] == run.decision_accuracy[i]);
    CHECK(agg.decision_accuracy.iqr[i] == 0.0);
    CHECK(agg.decision_accuracy.stddev[i] == 0.0);
  }
}

TEST_CASE("odd-count median") {
  const RunAggregate agg = aggregate_runs(
      {make_run({1.0}, {}), make_run({2.0}, {}), make_run({3.0}, {})});
  CHECK(agg.decision_accuracy.median[0] == 2.0);
}

TEST_CASE("aggregation is permutation-invariant") {
  std::vector<CampaignResult> runs = {make_run({0.2, 0.4}, {1}),
                                      make_run({0.9, 0.8, 0.7}, {2, 5}),
                                      make_run({0.5}, {}),
                                      make_run({0.1, 0.6}, {9})};
  const RunAggregate forward = aggregate_runs(runs);
  std::reverse(runs.begin(), runs.end());
  const RunAggregate backward = aggregate_runs(runs);
  CHECK(forward.decision_accuracy.median == backward.decision_accuracy.median);
  CHECK(forward.decision_accuracy.iqr == backward.decision_accuracy.iqr);
  CHECK(forward.observation_query_hist.counts ==
        backward.observation_query_hist.counts);
}

TEST_CASE("carry-forward holds shorter runs at their final value") {
  const RunAggregate agg =
      aggregate_runs({make_run({0.5}, {}), make_run({0.0, 1.0, 1.0}, {1, 2})});
  CHECK(agg.track_length == 3);
  // At index 2 the short run still contributes its final 0.5.
  CHECK(agg.decision_accuracy.median[2] == doctest::Approx(0.75));
  CHECK(agg.decision_accuracy.median[0] == doctest::Approx(0.25));
}

TEST_CASE("histograms use 25-wide bins") {
  std::vector<CampaignResult> runs;
  std::vector<int> indices;
  for (int i = 0; i < 60; ++i) indices.push_back(i);
  CampaignResult run = make_run(std::vector<double>(61, 0.5), indices);
  runs.push_back(run);
  const RunAggregate agg = aggregate_runs(runs);
  CHECK(agg.query_count_hist.bin_width == 25);
  CHECK(agg.observation_query_hist.bin_width == 25);
  // 60 queries fall into bin 2 of the count histogram.
  CHECK(agg.query_count_hist.counts.size() == 3);
  CHECK(agg.query_count_hist.counts[2] == 1);
  // Observation indices 0..59: bins of 25, 25, 10.
  CHECK(agg.observation_query_hist.counts ==
        std::vector<long>{25, 25, 10});
}

TEST_CASE("aggregate rejects the empty input") {
  CHECK_THROWS_AS(aggregate_runs({}), DataError);
}
