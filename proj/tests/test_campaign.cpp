#include <doctest.h>

#include <memory>

#include <rbal/campaign.hpp>
#include <rbal/dataset.hpp>
#include <rbal/errors.hpp>

#include "support/processes.hpp"
#include "support/toy_data.hpp"

using namespace rbal;
using namespace rbal::testing;

namespace {

struct Fixture {
  LabelledSet labelled;
  UnlabelledPool pool;
  Dataset test;
};

Fixture make_fixture(int per_class_per_cycle, int cycles, std::uint64_t seed,
                     double init_fraction = 0.1) {
  SyntheticConfig config = SyntheticConfig::default_config();
  config.cycles = cycles;
  config.points_per_cycle_per_class.assign(4, per_class_per_cycle);
  config.first_cycle_trim = 0;
  config.seed = seed;
  const Dataset data = generate_synthetic(config);
  const SplitResult split = split_and_init(data, 0.5, init_fraction, seed + 1);
  return {split.train_labelled, split.train_pool, split.test};
}

AgentConfig make_agent(ClassifierKind kind, const DecisionProcess& process,
                       DecisionMode mode = DecisionMode::kAgent) {
  AgentConfig agent;
  agent.name = to_string(kind);
  agent.classifier = kind;
  agent.decision_mode = mode;
  agent.process = std::make_shared<const DecisionProcess>(process);
  return agent;
}

DecisionProcess with_cost(const DecisionProcess& process, double cost) {
  Vec ud(process.num_actions());
  for (int a = 0; a < process.num_actions(); ++a) ud[a] = process.action_utility(a);
  Vec uy(process.num_states());
  for (int y = 0; y < process.num_states(); ++y) uy[y] = process.state_utility(y);
  std::vector<Mat> trans;
  for (int a = 0; a < process.num_actions(); ++a) trans.push_back(process.transition(a));
  return DecisionProcess(ud, uy, trans, cost);
}

bool results_equal(const CampaignResult& a, const CampaignResult& b) {
  if (a.query_count != b.query_count) return false;
  if (a.decision_accuracy != b.decision_accuracy) return false;
  if (a.macro_f1 != b.macro_f1) return false;
  if (a.query_pool_indices != b.query_pool_indices) return false;
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    if (a.steps[i].evpi != b.steps[i].evpi) return false;
    if (a.steps[i].queried != b.steps[i].queried) return false;
    if (a.steps[i].action != b.steps[i].action) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("an unaffordable inspection cost never queries") {
  const Fixture fixture = make_fixture(20, 2, 5);
  const AgentConfig agent =
      make_agent(ClassifierKind::kGmm, with_cost(synthetic_process(), 1e18));
  const CampaignResult result =
      run_campaign(fixture.labelled, fixture.pool, fixture.test, agent, 0);
  CHECK(result.query_count == 0);
  CHECK(result.decision_accuracy.size() == 1);  // single metrics point
  CHECK(result.final_labelled.size() == fixture.labelled.size());
  CHECK(result.steps.size() == fixture.pool.size());
}

TEST_CASE("an empty pool produces zero steps") {
  const Fixture fixture = make_fixture(20, 1, 6);
  const AgentConfig agent = make_agent(ClassifierKind::kGmm, synthetic_process());
  const CampaignResult result = run_campaign(fixture.labelled, UnlabelledPool{},
                                             fixture.test, agent, 0);
  CHECK(result.steps.empty());
  CHECK(result.query_count == 0);
  CHECK(result.decision_accuracy.size() == 1);
}

TEST_CASE("query positions match a step-by-step enumeration outside the loop") {
  const Fixture fixture = make_fixture(10, 2, 7);
  const DecisionProcess process = synthetic_process();
  const AgentConfig agent = make_agent(ClassifierKind::kGmm, process);
  const CampaignResult result =
      run_campaign(fixture.labelled, fixture.pool, fixture.test, agent, 0);

  // Independent re-enactment of the stream: predict, compute EVPI, branch.
  const NiwPrior prior = NiwPrior::default_for(2);
  const Vec alpha = Vec::Ones(4);
  LabelledSet running = fixture.labelled;
  GmmPosterior model = fit_supervised(running, prior, alpha);
  std::vector<int> expected_queries;
  std::vector<double> expected_evpi;
  for (std::size_t pos = 0; pos < fixture.pool.size(); ++pos) {
    const Vec& x = fixture.pool.observations[pos].features;
    const ClassPosterior posterior = predict_posterior(x, model);
    const double value = evpi(posterior, process);
    expected_evpi.push_back(value);
    if (value > process.inspection_cost()) {
      expected_queries.push_back(static_cast<int>(pos));
      running.add(x, fixture.pool.hidden_labels[pos]);
      model = fit_supervised(running, prior, alpha);
    }
  }
  CHECK(result.query_pool_indices == expected_queries);
  REQUIRE(result.steps.size() == expected_evpi.size());
  for (std::size_t i = 0; i < expected_evpi.size(); ++i) {
    CHECK(result.steps[i].evpi == doctest::Approx(expected_evpi[i]).epsilon(1e-12));
  }
}

TEST_CASE("branch fidelity, label fidelity and perfect-information actions") {
  const Fixture fixture = make_fixture(15, 2, 8);
  const DecisionProcess process = synthetic_process();
  for (ClassifierKind kind : {ClassifierKind::kGmm, ClassifierKind::kGmmEm}) {
    const AgentConfig agent = make_agent(kind, process);
    const CampaignResult result =
        run_campaign(fixture.labelled, fixture.pool, fixture.test, agent, 0);
    int queries = 0;
    for (const CampaignStep& step : result.steps) {
      if (step.queried) {
        CHECK(step.evpi > process.inspection_cost());
        const int truth = fixture.pool.hidden_labels[step.pool_index];
        CHECK(step.action == perfect_info_policy(truth, process));
        ++queries;
      } else {
        CHECK(step.evpi <= process.inspection_cost());
      }
    }
    CHECK(queries == result.query_count);
    CHECK(result.final_labelled.size() == fixture.labelled.size() + queries);
    CHECK(static_cast<int>(result.decision_accuracy.size()) == queries + 1);
    // Revealed labels match the hidden ground truth.
    for (int q = 0; q < queries; ++q) {
      const int pos = result.query_pool_indices[q];
      CHECK(result.final_labelled.labels[fixture.labelled.size() + q] ==
            fixture.pool.hidden_labels[pos]);
    }
  }
}

TEST_CASE("campaigns are deterministic for every classifier variant") {
  const Fixture fixture = make_fixture(8, 2, 9);
  const DecisionProcess process = synthetic_process();
  for (ClassifierKind kind :
       {ClassifierKind::kGmm, ClassifierKind::kGmmEm, ClassifierKind::kGmmSmooth,
        ClassifierKind::kMrvm1, ClassifierKind::kMrvm2}) {
    const DecisionMode mode = kind == ClassifierKind::kGmmSmooth
                                  ? DecisionMode::kScripted
                                  : DecisionMode::kAgent;
    const AgentConfig agent = make_agent(kind, process, mode);
    const CampaignResult a =
        run_campaign(fixture.labelled, fixture.pool, fixture.test, agent, 3);
    const CampaignResult b =
        run_campaign(fixture.labelled, fixture.pool, fixture.test, agent, 3);
    CHECK(results_equal(a, b));
  }
}

TEST_CASE("scripted decisions repair exactly at hidden resets") {
  const Fixture fixture = make_fixture(10, 3, 10);
  const AgentConfig agent = make_agent(ClassifierKind::kGmm, synthetic_process(),
                                       DecisionMode::kScripted);
  const CampaignResult result =
      run_campaign(fixture.labelled, fixture.pool, fixture.test, agent, 0);
  for (std::size_t t = 0; t + 1 < fixture.pool.size(); ++t) {
    const bool reset =
        fixture.pool.hidden_labels[t + 1] < fixture.pool.hidden_labels[t];
    CHECK(result.steps[t].action == (reset ? 1 : 0));
  }
}

TEST_CASE("smoothing variant grows no pseudo-labels before the first query") {
  const Fixture fixture = make_fixture(10, 2, 11);
  const AgentConfig agent = make_agent(ClassifierKind::kGmmSmooth,
                                       synthetic_process(), DecisionMode::kScripted);
  const CampaignResult result =
      run_campaign(fixture.labelled, fixture.pool, fixture.test, agent, 0);
  // D_l itself only grows by ground-truth queries.
  CHECK(result.final_labelled.size() ==
        fixture.labelled.size() + static_cast<std::size_t>(result.query_count));
}

TEST_CASE("random baseline with zero queries equals the never-query campaign") {
  const Fixture fixture = make_fixture(12, 2, 12);
  const AgentConfig agent = make_agent(ClassifierKind::kGmm, synthetic_process());
  const AgentConfig frozen =
      make_agent(ClassifierKind::kGmm, with_cost(synthetic_process(), 1e18));
  const CampaignResult baseline =
      run_random_baseline(fixture.labelled, fixture.pool, fixture.test, agent, 0, 4);
  const CampaignResult never =
      run_campaign(fixture.labelled, fixture.pool, fixture.test, frozen, 4);
  CHECK(baseline.query_count == 0);
  CHECK(baseline.decision_accuracy == never.decision_accuracy);
  CHECK(baseline.macro_f1 == never.macro_f1);
}

TEST_CASE("random baseline with the full pool is fully supervised at the end") {
  const Fixture fixture = make_fixture(6, 1, 13);
  const AgentConfig agent = make_agent(ClassifierKind::kGmm, synthetic_process());
  const int n = static_cast<int>(fixture.pool.size());
  const CampaignResult result =
      run_random_baseline(fixture.labelled, fixture.pool, fixture.test, agent, n, 5);
  CHECK(result.query_count == n);
  CHECK(result.final_labelled.size() == fixture.labelled.size() + fixture.pool.size());
  CHECK_THROWS_AS(run_random_baseline(fixture.labelled, fixture.pool, fixture.test,
                                      agent, n + 1, 5),
                  ConfigError);
}

TEST_CASE("random baseline proportions converge toward balance") {
  const Fixture fixture = make_fixture(50, 2, 14, 0.05);
  const AgentConfig agent = make_agent(ClassifierKind::kGmm, synthetic_process());
  const int n_queries = static_cast<int>(0.8 * fixture.pool.size());
  const CampaignResult result = run_random_baseline(
      fixture.labelled, fixture.pool, fixture.test, agent, n_queries, 6);
  const Vec final_props =
      result.class_proportions.row(result.class_proportions.rows() - 1);
  for (int c = 0; c < 4; ++c) {
    CHECK(final_props[c] == doctest::Approx(0.25).epsilon(0.25));
  }
}

TEST_CASE("initial training failure aborts with step context") {
  Fixture fixture = make_fixture(6, 1, 15);
  fixture.labelled.features[0][0] = std::nan("");
  const AgentConfig agent = make_agent(ClassifierKind::kGmm, synthetic_process());
  CHECK_THROWS_AS(
      run_campaign(fixture.labelled, fixture.pool, fixture.test, agent, 0),
      CampaignError);
}

TEST_CASE("class-count mismatch with the process is rejected") {
  const Fixture fixture = make_fixture(6, 1, 16);
  Mat rows = Mat::Identity(3, 3);
  const DecisionProcess three_state(Vec::Zero(2), Vec::Zero(3), {rows, rows}, 1.0);
  const AgentConfig agent = make_agent(ClassifierKind::kGmm, three_state);
  CHECK_THROWS_AS(
      run_campaign(fixture.labelled, fixture.pool, fixture.test, agent, 0),
      DimensionError);
}
