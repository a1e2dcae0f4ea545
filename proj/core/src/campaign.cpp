#include "rbal/campaign.hpp"

#include <algorithm>
#include <unordered_set>

#include "rbal/metrics.hpp"
#include "rbal/rng.hpp"
#include "rbal/smoothing.hpp"

namespace rbal {

ClassifierKind classifier_kind_from_string(const std::string& name) {
  if (name == "gmm") return ClassifierKind::kGmm;
  if (name == "gmm_em") return ClassifierKind::kGmmEm;
  if (name == "gmm_smooth") return ClassifierKind::kGmmSmooth;
  if (name == "mrvm1") return ClassifierKind::kMrvm1;
  if (name == "mrvm2") return ClassifierKind::kMrvm2;
  throw ConfigError("unknown classifier '" + name + "'");
}

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kGmm: return "gmm";
    case ClassifierKind::kGmmEm: return "gmm_em";
    case ClassifierKind::kGmmSmooth: return "gmm_smooth";
    case ClassifierKind::kMrvm1: return "mrvm1";
    case ClassifierKind::kMrvm2: return "mrvm2";
  }
  return "unknown";
}

namespace {

// Mutable campaign bookkeeping shared with the classifier variants.
struct StreamState {
  const UnlabelledPool* pool = nullptr;
  LabelledSet labelled;
  std::vector<int> seen_unqueried;  // streamed pool positions still unlabelled
  std::vector<int> actions;         // logged action per streamed position

  // Inspection chain for the smoothing variant; position -1 is the virtual
  // anchor in the undamaged state.
  int last_inspection_pos = -1;
  int last_inspection_label = 1;
  LabelledSet pseudo_labelled;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const StreamState& state) = 0;
  // Called at a queried step before the new pair joins the labelled set and
  // before the refit; default is a no-op.
  virtual void on_query(StreamState& state, int pos, int label) {
    (void)state;
    (void)pos;
    (void)label;
  }
  virtual ClassPosterior predict(const Vec& x) const = 0;
};

class GmmClassifier : public Classifier {
 public:
  GmmClassifier(const NiwPrior& prior, const Vec& alpha)
      : prior_(prior), alpha_(alpha) {}

  void fit(const StreamState& state) override {
    posterior_.emplace(fit_supervised(state.labelled, prior_, alpha_));
  }
  ClassPosterior predict(const Vec& x) const override {
    return predict_posterior(x, *posterior_);
  }

 protected:
  NiwPrior prior_;
  Vec alpha_;
  std::optional<GmmPosterior> posterior_;
};

class GmmEmClassifier : public GmmClassifier {
 public:
  GmmEmClassifier(const NiwPrior& prior, const Vec& alpha, const EmOptions& options)
      : GmmClassifier(prior, alpha), options_(options) {}

  void fit(const StreamState& state) override {
    if (state.seen_unqueried.empty()) {
      GmmClassifier::fit(state);
      return;
    }
    UnlabelledPool seen;
    seen.num_classes = state.pool->num_classes;
    for (int pos : state.seen_unqueried) {
      seen.observations.push_back(state.pool->observations[pos]);
      seen.hidden_labels.push_back(state.pool->hidden_labels[pos]);
    }
    posterior_.emplace(
        em_fit(state.labelled, seen, prior_, alpha_, options_).posterior);
  }

 private:
  EmOptions options_;
};

class GmmSmoothClassifier : public GmmClassifier {
 public:
  GmmSmoothClassifier(const NiwPrior& prior, const Vec& alpha,
                      std::shared_ptr<const DecisionProcess> process)
      : GmmClassifier(prior, alpha), process_(std::move(process)) {}

  void fit(const StreamState& state) override {
    LabelledSet merged = state.labelled;
    for (std::size_t i = 0; i < state.pseudo_labelled.size(); ++i) {
      merged.add(state.pseudo_labelled.features[i], state.pseudo_labelled.labels[i]);
    }
    posterior_.emplace(fit_supervised(merged, prior_, alpha_));
  }

  void on_query(StreamState& state, int pos, int label) override {
    // Smooth the latent chain between the previous inspection and this one,
    // using the model as it stood at inspection time.
    SmoothingInterval interval;
    interval.start_label = state.last_inspection_label;
    interval.end_label = label;
    const int a = state.last_inspection_pos;
    for (int t = a + 1; t < pos; ++t) {
      interval.observations.push_back(state.pool->observations[t].features);
    }
    for (int t = a; t < pos; ++t) {
      interval.decisions.push_back(t < 0 ? 0 : state.actions[t]);
    }
    const std::vector<ClassPosterior> marginals =
        smooth_interval(interval, *posterior_, *process_);
    const std::vector<int> labels = pseudo_labels(marginals);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      state.pseudo_labelled.add(interval.observations[i], labels[i]);
    }
    state.last_inspection_pos = pos;
    state.last_inspection_label = label;
  }

 private:
  std::shared_ptr<const DecisionProcess> process_;
};

class MrvmClassifier : public Classifier {
 public:
  MrvmClassifier(bool constructive, const KernelConfig& kernel,
                 const TrainHyper& hyper)
      : constructive_(constructive), kernel_(kernel), hyper_(hyper) {}

  void fit(const StreamState& state) override {
    model_ = constructive_ ? train_mrvm1(state.labelled, kernel_, hyper_)
                           : train_mrvm2(state.labelled, kernel_, hyper_);
  }
  ClassPosterior predict(const Vec& x) const override {
    return mrvm_predict(*model_, x);
  }

 private:
  bool constructive_;
  KernelConfig kernel_;
  TrainHyper hyper_;
  std::optional<MrvmModel> model_;
};

std::unique_ptr<Classifier> make_classifier(const AgentConfig& agent, int dim,
                                            int num_classes) {
  const NiwPrior prior = agent.prior ? *agent.prior : NiwPrior::default_for(dim);
  const Vec alpha = Vec::Constant(num_classes, agent.alpha);
  KernelConfig kernel = agent.kernel_gamma
                            ? KernelConfig{*agent.kernel_gamma}
                            : KernelConfig::gaussian_default(dim);
  switch (agent.classifier) {
    case ClassifierKind::kGmm:
      return std::make_unique<GmmClassifier>(prior, alpha);
    case ClassifierKind::kGmmEm:
      return std::make_unique<GmmEmClassifier>(prior, alpha, agent.em);
    case ClassifierKind::kGmmSmooth:
      return std::make_unique<GmmSmoothClassifier>(prior, alpha, agent.process);
    case ClassifierKind::kMrvm1:
      return std::make_unique<MrvmClassifier>(true, kernel, agent.mrvm);
    case ClassifierKind::kMrvm2:
      return std::make_unique<MrvmClassifier>(false, kernel, agent.mrvm);
  }
  throw ConfigError("unhandled classifier kind");
}

// Scripted decision log: repair exactly where the hidden label sequence
// resets toward class 1, do-nothing elsewhere.
std::vector<int> scripted_actions(const UnlabelledPool& pool) {
  std::vector<int> actions(pool.size(), 0);
  for (std::size_t t = 0; t + 1 < pool.size(); ++t) {
    if (pool.hidden_labels[t + 1] < pool.hidden_labels[t]) actions[t] = 1;
  }
  return actions;
}

struct TestMetrics {
  double accuracy = 0.0;
  double f1 = 0.0;
};

TestMetrics evaluate_on_test(const Classifier& classifier, const Dataset& test,
                             const DecisionProcess& process) {
  std::vector<int> chosen;
  std::vector<int> best;
  std::vector<int> predicted;
  chosen.reserve(test.size());
  best.reserve(test.size());
  predicted.reserve(test.size());

  std::vector<int> informed_policy(process.num_states());
  for (int y = 1; y <= process.num_states(); ++y) {
    informed_policy[y - 1] = perfect_info_policy(y, process);
  }

  for (std::size_t i = 0; i < test.size(); ++i) {
    const ClassPosterior posterior =
        classifier.predict(test.observations[i].features);
    chosen.push_back(optimal_action(posterior, process).first);
    best.push_back(informed_policy[test.labels[i] - 1]);
    int arg = 0;
    for (int c = 1; c < posterior.size(); ++c) {
      if (posterior.probs[c] > posterior.probs[arg]) arg = c;
    }
    predicted.push_back(arg + 1);
  }
  TestMetrics out;
  out.accuracy = decision_accuracy(chosen, best);
  out.f1 = macro_f1(predicted, test.labels, test.num_classes);
  return out;
}

Vec labelled_proportions(const LabelledSet& labelled) {
  Vec counts = Vec::Zero(labelled.num_classes);
  for (int label : labelled.labels) counts[label - 1] += 1.0;
  return counts / std::max<double>(1.0, static_cast<double>(labelled.size()));
}

CampaignResult run_stream(const LabelledSet& labelled, const UnlabelledPool& pool,
                          const Dataset& test, const AgentConfig& agent,
                          const std::unordered_set<int>* forced_queries) {
  if (!agent.process) throw ConfigError("campaign: agent has no decision process");
  const DecisionProcess& process = *agent.process;
  if (labelled.size() == 0) throw ConfigError("campaign: empty initial labelled set");
  if (labelled.num_classes != process.num_states()) {
    throw DimensionError("campaign: class count does not match decision process");
  }

  StreamState state;
  state.pool = &pool;
  state.labelled = labelled;
  state.actions.assign(pool.size(), 0);

  const std::vector<int> scripted = agent.decision_mode == DecisionMode::kScripted
                                        ? scripted_actions(pool)
                                        : std::vector<int>();

  std::unique_ptr<Classifier> classifier =
      make_classifier(agent, labelled.dim(), labelled.num_classes);
  try {
    classifier->fit(state);
  } catch (const Error& e) {
    throw CampaignError(std::string("campaign initial fit: ") + e.what(), -1);
  }

  CampaignResult result;
  std::vector<Vec> proportion_rows;
  auto record_metrics = [&]() {
    const TestMetrics metrics = evaluate_on_test(*classifier, test, process);
    result.decision_accuracy.push_back(metrics.accuracy);
    result.macro_f1.push_back(metrics.f1);
    proportion_rows.push_back(labelled_proportions(state.labelled));
  };
  record_metrics();

  const double cost = process.inspection_cost();
  for (int pos = 0; pos < static_cast<int>(pool.size()); ++pos) {
    const Vec& x = pool.observations[pos].features;
    CampaignStep step;
    step.time_index = pool.observations[pos].time_index;
    step.pool_index = pos;
    step.posterior = classifier->predict(x);
    step.evpi = evpi(step.posterior, process);
    step.queried = forced_queries ? forced_queries->count(pos) > 0
                                  : step.evpi > cost;

    if (step.queried) {
      const int label = pool.hidden_labels[pos];
      try {
        classifier->on_query(state, pos, label);
        state.labelled.add(x, label);
        classifier->fit(state);
      } catch (const Error& e) {
        throw CampaignError("campaign step " + std::to_string(pos) + ": " + e.what(),
                            pos);
      }
      step.action = perfect_info_policy(label, process);
      result.query_count += 1;
      result.query_pool_indices.push_back(pos);
      result.query_evpi.push_back(step.evpi);
      record_metrics();
    } else {
      state.seen_unqueried.push_back(pos);
      step.action = optimal_action(step.posterior, process).first;
    }
    if (agent.decision_mode == DecisionMode::kScripted) {
      step.action = scripted[pos];
    }
    state.actions[pos] = step.action;
    result.steps.push_back(std::move(step));
  }

  result.final_labelled = std::move(state.labelled);
  result.class_proportions = Mat(proportion_rows.size(), labelled.num_classes);
  for (std::size_t r = 0; r < proportion_rows.size(); ++r) {
    result.class_proportions.row(static_cast<Eigen::Index>(r)) = proportion_rows[r];
  }
  return result;
}

}  // namespace

CampaignResult run_campaign(const LabelledSet& labelled, const UnlabelledPool& pool,
                            const Dataset& test, const AgentConfig& agent,
                            std::uint64_t seed) {
  (void)seed;  // all variants are deterministic; kept for interface stability
  return run_stream(labelled, pool, test, agent, nullptr);
}

CampaignResult run_random_baseline(const LabelledSet& labelled,
                                   const UnlabelledPool& pool, const Dataset& test,
                                   const AgentConfig& agent, int n_queries,
                                   std::uint64_t seed) {
  if (n_queries < 0 || n_queries > static_cast<int>(pool.size())) {
    throw ConfigError("random baseline: n_queries exceeds pool size");
  }
  Rng rng(seed);
  const std::vector<std::size_t> draw =
      rng.sample_without_replacement(pool.size(), static_cast<std::size_t>(n_queries));
  std::unordered_set<int> forced;
  for (std::size_t pos : draw) forced.insert(static_cast<int>(pos));
  return run_stream(labelled, pool, test, agent, &forced);
}

}  // namespace rbal
