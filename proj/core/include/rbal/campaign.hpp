#ifndef RBAL_CAMPAIGN_HPP
#define RBAL_CAMPAIGN_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rbal/decision.hpp"
#include "rbal/em.hpp"
#include "rbal/errors.hpp"
#include "rbal/gmm.hpp"
#include "rbal/mrvm.hpp"
#include "rbal/types.hpp"

namespace rbal {

enum class ClassifierKind { kGmm, kGmmEm, kGmmSmooth, kMrvm1, kMrvm2 };
enum class DecisionMode { kAgent, kScripted };

ClassifierKind classifier_kind_from_string(const std::string& name);
std::string to_string(ClassifierKind kind);

// Everything one campaign worker needs: the classifier variant, the decision
// process, how pool-step decisions are logged, and the classifier's
// hyperparameters.
struct AgentConfig {
  std::string name = "gmm";
  ClassifierKind classifier = ClassifierKind::kGmm;
  DecisionMode decision_mode = DecisionMode::kAgent;
  std::shared_ptr<const DecisionProcess> process;

  double alpha = 1.0;                   // symmetric Dirichlet concentration
  std::optional<NiwPrior> prior;        // default: NiwPrior::default_for(D)
  EmOptions em;                         // gmm_em variant
  TrainHyper mrvm;                      // mrvm variants
  std::optional<double> kernel_gamma;   // default: 1/D
};

struct CampaignStep {
  std::int64_t time_index = 0;
  int pool_index = 0;
  ClassPosterior posterior;
  double evpi = 0.0;
  bool queried = false;
  int action = 0;
};

// Per-step log plus the metric trajectories evaluated on the test set after
// the initial fit and after every retrain (length query_count + 1).
struct CampaignResult {
  std::vector<CampaignStep> steps;
  int query_count = 0;
  LabelledSet final_labelled;

  std::vector<double> decision_accuracy;
  std::vector<double> macro_f1;
  Mat class_proportions;               // (query_count + 1) x K shares of D_l
  std::vector<int> query_pool_indices; // pool position of each query
  std::vector<double> query_evpi;      // EVPI at each queried step
};

// Thrown when a retrain fails mid-campaign; carries the pool step.
class CampaignError : public Error {
 public:
  CampaignError(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// The risk-based active-learning loop: stream the pool in time order, query
// the hidden label whenever EVPI exceeds the inspection cost, retrain after
// each query (with the EM or smoothing extension for those variants), and act
// by maximum expected utility (under perfect information at inspected steps).
CampaignResult run_campaign(const LabelledSet& labelled, const UnlabelledPool& pool,
                            const Dataset& test, const AgentConfig& agent,
                            std::uint64_t seed);

// Identical mechanics, but the query positions are a uniform random draw of
// n_queries pool indices instead of the EVPI rule.
CampaignResult run_random_baseline(const LabelledSet& labelled,
                                   const UnlabelledPool& pool, const Dataset& test,
                                   const AgentConfig& agent, int n_queries,
                                   std::uint64_t seed);

}  // namespace rbal

#endif  // RBAL_CAMPAIGN_HPP
