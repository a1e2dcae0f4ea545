#include "rbal/smoothing.hpp"

#include <cmath>

#include "rbal/errors.hpp"

namespace rbal {

void SmoothingInterval::validate(int num_states, int num_actions) const {
  if (start_label < 1 || start_label > num_states ||
      end_label < 1 || end_label > num_states) {
    throw DataError("smoothing interval: boundary label outside state range");
  }
  if (decisions.size() != observations.size() + 1) {
    throw DataError("smoothing interval: need one decision per step from a to b-1");
  }
  for (int action : decisions) {
    if (action < 0 || action >= num_actions) {
      throw DataError("smoothing interval: action outside decision domain");
    }
  }
}

std::vector<ClassPosterior> smooth_interval(const SmoothingInterval& interval,
                                            const GmmPosterior& classifier,
                                            const DecisionProcess& process) {
  const int k = process.num_states();
  if (classifier.num_classes() != k) {
    throw DimensionError("smoothing: classifier and process class counts differ");
  }
  interval.validate(k, process.num_actions());

  const int len = static_cast<int>(interval.observations.size());
  std::vector<ClassPosterior> marginals;
  if (len == 0) return marginals;

  // Class-conditional likelihoods, rescaled per time step; smoothing is
  // invariant to positive rescaling of the messages.
  Mat likelihood(len, k);
  for (int t = 0; t < len; ++t) {
    Vec log_like(k);
    for (int c = 0; c < k; ++c) {
      log_like[c] = predictive_log_density(interval.observations[t], c + 1, classifier);
    }
    const double peak = log_like.maxCoeff();
    for (int c = 0; c < k; ++c) likelihood(t, c) = std::exp(log_like[c] - peak);
  }

  // Forward pass: phi_t for each intermediate time, anchored at y_a.
  Mat forward(len, k);
  Vec prev = Vec::Zero(k);
  prev[interval.start_label - 1] = 1.0;
  for (int t = 0; t < len; ++t) {
    const Mat& trans = process.transition(interval.decisions[t]);
    Vec message = (prev.transpose() * trans).transpose();
    message.array() *= likelihood.row(t).transpose().array();
    const double total = message.sum();
    if (total <= 0.0) {
      throw EvidenceConflictError(
          "smoothing: forward message vanished at intermediate step " +
              std::to_string(t),
          t);
    }
    forward.row(t) = message / total;
    prev = forward.row(t);
  }

  // Backward pass: psi_t, anchored at y_b.
  Mat backward(len, k);
  {
    const Mat& trans = process.transition(interval.decisions[len]);
    backward.row(len - 1) = trans.col(interval.end_label - 1);
  }
  for (int t = len - 2; t >= 0; --t) {
    const Mat& trans = process.transition(interval.decisions[t + 1]);
    Vec next = backward.row(t + 1).transpose();
    next.array() *= likelihood.row(t + 1).transpose().array();
    Vec message = trans * next;
    const double total = message.sum();
    if (total > 0.0) message /= total;
    backward.row(t) = message;
  }

  marginals.reserve(len);
  for (int t = 0; t < len; ++t) {
    Vec product = forward.row(t).cwiseProduct(backward.row(t));
    const double total = product.sum();
    if (total <= 0.0) {
      throw EvidenceConflictError(
          "smoothing: impossible evidence at intermediate step " + std::to_string(t),
          t);
    }
    ClassPosterior marginal;
    marginal.probs = product / total;
    marginals.push_back(std::move(marginal));
  }
  return marginals;
}

std::vector<int> pseudo_labels(const std::vector<ClassPosterior>& marginals) {
  std::vector<int> labels;
  labels.reserve(marginals.size());
  for (const ClassPosterior& marginal : marginals) {
    int best = 0;
    for (int c = 1; c < marginal.size(); ++c) {
      if (marginal.probs[c] > marginal.probs[best]) best = c;
    }
    labels.push_back(best + 1);
  }
  return labels;
}

}  // namespace rbal
