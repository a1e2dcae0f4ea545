#ifndef RBAL_DECISION_HPP
#define RBAL_DECISION_HPP

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rbal/math.hpp"

namespace rbal {

// Belief over the K health states.
struct ClassPosterior {
  Vec probs;

  int size() const { return static_cast<int>(probs.size()); }
  static ClassPosterior point_mass(int state, int num_states);
  static ClassPosterior uniform(int num_states);

  // Throws DataError unless entries are nonnegative and sum to 1 +- 1e-9.
  void validate() const;
};

// A single-transition maintenance decision process: action utilities U(d),
// next-state utilities U(y_{t+1}), one row-stochastic K x K transition matrix
// per action, and the inspection cost that gates label queries.
class DecisionProcess {
 public:
  DecisionProcess(Vec action_utilities, Vec state_utilities,
                  std::vector<Mat> transitions, double inspection_cost,
                  std::vector<std::string> action_names = {});

  static DecisionProcess from_json(const nlohmann::json& doc);
  static DecisionProcess load(const std::string& path);
  nlohmann::json to_json() const;

  int num_actions() const { return static_cast<int>(action_utilities_.size()); }
  int num_states() const { return static_cast<int>(state_utilities_.size()); }
  double inspection_cost() const { return inspection_cost_; }
  double action_utility(int action) const { return action_utilities_[action]; }
  double state_utility(int state_index) const { return state_utilities_[state_index]; }
  const Mat& transition(int action) const { return transitions_[action]; }
  const std::string& action_name(int action) const { return action_names_[action]; }

  // forecast_value(a)[y] = sum_{y'} P(y'|y,a) U(y'); cached at construction.
  const Vec& forecast_value(int action) const { return forecast_values_[action]; }
  // informed_value()[y] = max_a [U(a) + forecast_value(a)[y]], the expected
  // utility available once y is known.
  const Vec& informed_value() const { return informed_values_; }

 private:
  Vec action_utilities_;
  Vec state_utilities_;
  std::vector<Mat> transitions_;
  double inspection_cost_;
  std::vector<std::string> action_names_;
  std::vector<Vec> forecast_values_;
  Vec informed_values_;
};

// U(d) + sum_y p(y) sum_{y'} P(y'|y,d) U(y').
double expected_utility(const ClassPosterior& posterior, int action,
                        const DecisionProcess& process);

// Argmax over actions of expected_utility; ties break toward the lowest
// action index.
std::pair<int, double> optimal_action(const ClassPosterior& posterior,
                                      const DecisionProcess& process);

// Expected value of observing the state before acting:
// sum_y p(y) max_d EU(delta_y, d) - max_d EU(p, d). Nonnegative up to
// rounding.
double evpi(const ClassPosterior& posterior, const DecisionProcess& process);

// Optimal action for a known state label in {1..K}.
int perfect_info_policy(int state_label, const DecisionProcess& process);

}  // namespace rbal

#endif  // RBAL_DECISION_HPP
