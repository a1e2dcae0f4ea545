#ifndef RBAL_SMOOTHING_HPP
#define RBAL_SMOOTHING_HPP

#include <vector>

#include "rbal/decision.hpp"
#include "rbal/gmm.hpp"

namespace rbal {

// The latent chain between two inspections at times a and b: both boundary
// labels are known, the intermediate observations are not, and the actions
// taken over [a, b) drive the transition model.
struct SmoothingInterval {
  int start_label = 1;             // y_a in {1..K}
  int end_label = 1;               // y_b in {1..K}
  std::vector<Vec> observations;   // x_{a+1} .. x_{b-1}
  std::vector<int> decisions;      // d_a .. d_{b-1}; length = observations + 1

  void validate(int num_states, int num_actions) const;
};

// Forward-backward smoothing of the interval's latent states. The observation
// likelihood is the classifier's class-conditional Student-t predictive;
// messages are renormalized at every step. Returns one marginal per
// intermediate time. Throws EvidenceConflictError when a marginal collapses
// to zero everywhere (the inspected labels cannot be produced by the
// transition model).
std::vector<ClassPosterior> smooth_interval(const SmoothingInterval& interval,
                                            const GmmPosterior& classifier,
                                            const DecisionProcess& process);

// MAP label per smoothed marginal; ties break toward the lowest class index.
std::vector<int> pseudo_labels(const std::vector<ClassPosterior>& marginals);

}  // namespace rbal

#endif  // RBAL_SMOOTHING_HPP
