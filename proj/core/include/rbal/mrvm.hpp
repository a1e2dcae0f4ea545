#ifndef RBAL_MRVM_HPP
#define RBAL_MRVM_HPP

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rbal/decision.hpp"
#include "rbal/math.hpp"
#include "rbal/types.hpp"

namespace rbal {

// Gaussian radial basis kernel k(x, x') = exp(-gamma ||x - x'||^2).
struct KernelConfig {
  double gamma = 1.0;

  static KernelConfig gaussian_default(int dim) {
    return KernelConfig{1.0 / static_cast<double>(dim)};
  }
  void validate() const;
};

Mat kernel_gram(const std::vector<Vec>& rows, const std::vector<Vec>& cols,
                const KernelConfig& kernel);

struct TrainHyper {
  double tau = 1e-6;            // Gamma hyperprior shape
  double nu = 1e-6;             // Gamma hyperprior scale
  int max_iter = 500;
  double conv_tol = 1e-4;       // relative Frobenius change of the weights
  int quad_nodes = 30;
  double prune_threshold = 1e5;

  void validate() const;
};

// Sparse multiclass relevance vector machine: the retained training samples
// (relevance vectors), their weight matrix, and the per-weight scale matrix.
class MrvmModel {
 public:
  std::vector<Vec> active_samples;  // relevance vectors, training order
  Mat weights;                      // n* x K
  Mat scales;                       // n* x K
  KernelConfig kernel;
  int num_classes = 0;
  int quad_nodes = 30;
  // False when training could not find any sample with a positive
  // contribution; such a model predicts the uniform distribution everywhere.
  bool discriminative = true;

  int relevance_count() const { return static_cast<int>(active_samples.size()); }

  nlohmann::json to_json() const;
  static MrvmModel from_json(const nlohmann::json& doc);
};

// Working state shared by both trainers. `gram` rows follow `active`; columns
// run over the full training set.
struct MrvmTrainState {
  Mat full_gram;            // n x n symmetric kernel matrix
  std::vector<int> active;  // indices into the training set
  Mat weights;              // |active| x K
  Mat aux_targets;          // K x n auxiliary regression targets
  Mat scales;               // |active| x K
  std::vector<int> labels;  // n labels in {1..K}
  int num_classes = 0;
};

// Posterior-mean scale update alpha = (2 tau + 1) / (w^2 + 2 nu), taking the
// second moment of the weight as its argument.
double mrvm_scale_update(double weight_second_moment, double tau, double nu);

// One EM sweep: weight solve per class with ridge fallback, truncated-
// Gaussian auxiliary updates via Gauss-Hermite quadrature, and (optionally)
// the scale update evaluated at each weight's posterior second moment
// (MAP^2 + posterior variance).
void mrvm_em_step(MrvmTrainState& state, const TrainHyper& hyper,
                  bool update_scales = true);

// Sparsity factor s_i, per-class quality factors q_{k,i} and the contribution
// theta_i = sum_k q_{k,i}^2 - K s_i of one candidate sample, computed against
// the marginal-covariance matrix with the candidate's own basis removed.
// Shared (per-sample) scales are read from the first column of state.scales.
struct ThetaContribution {
  double sparsity = 0.0;
  Vec quality;
  double theta = 0.0;
};
ThetaContribution theta_contributions(const MrvmTrainState& state, int candidate);

// Constructive trainer: grows the relevance set from empty, re-estimating
// shared scales via alpha_i = K s_i^2 / theta_i; pruned samples may re-enter.
MrvmModel train_mrvm1(const LabelledSet& labelled, const KernelConfig& kernel,
                      const TrainHyper& hyper);

// Pruning trainer: starts from the full labelled set and discards samples
// whose scales exceed prune_threshold for every class; no re-entry.
MrvmModel train_mrvm2(const LabelledSet& labelled, const KernelConfig& kernel,
                      const TrainHyper& hyper);

// Multinomial probit class probabilities
// p(k) = E_u[ prod_{j != k} Phi(u + f_k - f_j) ] by Gauss-Hermite quadrature,
// renormalized to sum exactly to one.
ClassPosterior probit_class_probs(const MrvmModel& model, const Vec& x,
                                  int quad_nodes);

// Raw quadrature values before renormalization, from the auxiliary ranking
// vector f; exposed for quadrature-consistency checks.
Vec probit_probs_raw(const Vec& f, int quad_nodes);

ClassPosterior mrvm_predict(const MrvmModel& model, const Vec& x);

}  // namespace rbal

#endif  // RBAL_MRVM_HPP
