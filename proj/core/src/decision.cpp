#include "rbal/decision.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rbal/errors.hpp"

namespace rbal {

ClassPosterior ClassPosterior::point_mass(int state, int num_states) {
  if (state < 1 || state > num_states) {
    throw DimensionError("point mass state " + std::to_string(state) +
                         " outside {1.." + std::to_string(num_states) + "}");
  }
  ClassPosterior p;
  p.probs = Vec::Zero(num_states);
  p.probs[state - 1] = 1.0;
  return p;
}

ClassPosterior ClassPosterior::uniform(int num_states) {
  ClassPosterior p;
  p.probs = Vec::Constant(num_states, 1.0 / num_states);
  return p;
}

void ClassPosterior::validate() const {
  if (probs.size() == 0) throw DataError("empty class posterior");
  if (probs.minCoeff() < 0.0) throw DataError("class posterior has negative entry");
  if (std::abs(probs.sum() - 1.0) > 1e-9) {
    throw DataError("class posterior does not sum to 1");
  }
}

DecisionProcess::DecisionProcess(Vec action_utilities, Vec state_utilities,
                                 std::vector<Mat> transitions,
                                 double inspection_cost,
                                 std::vector<std::string> action_names)
    : action_utilities_(std::move(action_utilities)),
      state_utilities_(std::move(state_utilities)),
      transitions_(std::move(transitions)),
      inspection_cost_(inspection_cost),
      action_names_(std::move(action_names)) {
  const int actions = num_actions();
  const int states = num_states();
  if (actions < 2) throw ConfigError("decision process needs at least 2 actions");
  if (states < 1) throw ConfigError("decision process needs at least 1 state");
  if (static_cast<int>(transitions_.size()) != actions) {
    throw ConfigError("decision process needs one transition matrix per action");
  }
  if (inspection_cost_ < 0.0) {
    throw ConfigError("inspection cost must be nonnegative");
  }
  for (int a = 0; a < actions; ++a) {
    const Mat& t = transitions_[a];
    if (t.rows() != states || t.cols() != states) {
      throw ConfigError("transition matrix for action " + std::to_string(a) +
                        " is not " + std::to_string(states) + "x" +
                        std::to_string(states));
    }
    for (int y = 0; y < states; ++y) {
      if (t.row(y).minCoeff() < 0.0) {
        throw ConfigError("transition matrix for action " + std::to_string(a) +
                          " has a negative entry in row " + std::to_string(y + 1));
      }
      if (std::abs(t.row(y).sum() - 1.0) > 1e-12) {
        throw ConfigError("transition matrix for action " + std::to_string(a) +
                          " row " + std::to_string(y + 1) + " does not sum to 1");
      }
    }
  }
  if (action_names_.empty()) {
    for (int a = 0; a < actions; ++a) {
      action_names_.push_back("action-" + std::to_string(a));
    }
  }
  if (static_cast<int>(action_names_.size()) != actions) {
    throw ConfigError("decision process action names do not match action count");
  }

  forecast_values_.reserve(actions);
  for (int a = 0; a < actions; ++a) {
    forecast_values_.push_back(transitions_[a] * state_utilities_);
  }
  informed_values_ = Vec(states);
  for (int y = 0; y < states; ++y) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < actions; ++a) {
      best = std::max(best, action_utilities_[a] + forecast_values_[a][y]);
    }
    informed_values_[y] = best;
  }
}

DecisionProcess DecisionProcess::from_json(const nlohmann::json& doc) {
  try {
    const auto actions = doc.at("actions").get<std::vector<std::string>>();
    const auto action_utilities = doc.at("action_utilities").get<std::vector<double>>();
    const auto state_utilities = doc.at("state_utilities").get<std::vector<double>>();
    const auto transitions =
        doc.at("transitions").get<std::vector<std::vector<std::vector<double>>>>();
    const double inspection_cost = doc.at("inspection_cost").get<double>();

    Vec ud = Eigen::Map<const Vec>(action_utilities.data(), action_utilities.size());
    Vec uy = Eigen::Map<const Vec>(state_utilities.data(), state_utilities.size());
    std::vector<Mat> trans;
    for (const auto& rows : transitions) {
      Mat t(rows.size(), rows.empty() ? 0 : rows[0].size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != static_cast<std::size_t>(t.cols())) {
          throw ConfigError("transition matrix rows have inconsistent lengths");
        }
        for (std::size_t c = 0; c < rows[r].size(); ++c) t(r, c) = rows[r][c];
      }
      trans.push_back(std::move(t));
    }
    return DecisionProcess(std::move(ud), std::move(uy), std::move(trans),
                           inspection_cost, actions);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("decision process json: ") + e.what());
  }
}

DecisionProcess DecisionProcess::load(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open decision process file: " + path);
  nlohmann::json doc;
  try {
    file >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("decision process file " + path + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json DecisionProcess::to_json() const {
  nlohmann::json doc;
  doc["actions"] = action_names_;
  doc["action_utilities"] = std::vector<double>(
      action_utilities_.data(), action_utilities_.data() + action_utilities_.size());
  doc["state_utilities"] = std::vector<double>(
      state_utilities_.data(), state_utilities_.data() + state_utilities_.size());
  std::vector<std::vector<std::vector<double>>> trans;
  for (const Mat& t : transitions_) {
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < t.rows(); ++r) {
      rows.emplace_back(t.row(r).begin(), t.row(r).end());
    }
    trans.push_back(std::move(rows));
  }
  doc["transitions"] = trans;
  doc["inspection_cost"] = inspection_cost_;
  return doc;
}

namespace {

void check_posterior(const ClassPosterior& posterior, const DecisionProcess& process) {
  if (posterior.size() != process.num_states()) {
    throw DimensionError("posterior length " + std::to_string(posterior.size()) +
                         " does not match state count " +
                         std::to_string(process.num_states()));
  }
}

}  // namespace

double expected_utility(const ClassPosterior& posterior, int action,
                        const DecisionProcess& process) {
  check_posterior(posterior, process);
  if (action < 0 || action >= process.num_actions()) {
    throw DimensionError("action index " + std::to_string(action) +
                         " outside action domain");
  }
  return process.action_utility(action) +
         posterior.probs.dot(process.forecast_value(action));
}

std::pair<int, double> optimal_action(const ClassPosterior& posterior,
                                      const DecisionProcess& process) {
  check_posterior(posterior, process);
  int best_action = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < process.num_actions(); ++a) {
    const double eu = process.action_utility(a) +
                      posterior.probs.dot(process.forecast_value(a));
    if (eu > best) {
      best = eu;
      best_action = a;
    }
  }
  return {best_action, best};
}

double evpi(const ClassPosterior& posterior, const DecisionProcess& process) {
  check_posterior(posterior, process);
  const double informed = posterior.probs.dot(process.informed_value());
  const double uninformed = optimal_action(posterior, process).second;
  return informed - uninformed;
}

int perfect_info_policy(int state_label, const DecisionProcess& process) {
  if (state_label < 1 || state_label > process.num_states()) {
    throw DataError("state label " + std::to_string(state_label) +
                    " outside {1.." + std::to_string(process.num_states()) + "}");
  }
  return optimal_action(ClassPosterior::point_mass(state_label, process.num_states()),
                        process)
      .first;
}

}  // namespace rbal
