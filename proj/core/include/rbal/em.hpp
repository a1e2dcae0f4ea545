#ifndef RBAL_EM_HPP
#define RBAL_EM_HPP

#include <vector>

#include "rbal/gmm.hpp"
#include "rbal/types.hpp"

namespace rbal {

// Soft class assignments for the pool plus Kronecker-delta assignments for
// the labelled points.
struct Responsibilities {
  Mat matrix;            // m x K, one soft row per pool observation
  Mat labelled_deltas;   // n x K, delta rows for the labelled points
  Vec effective_counts;  // r_k, column sums of `matrix`
  Vec total_counts;      // N_k = n_k + r_k
};

// Unlabelled rows come from predict_posterior under the given model; labelled
// rows are deltas on the known label.
Responsibilities e_step(const UnlabelledPool& pool, const LabelledSet& labelled,
                        const GmmPosterior& posterior);

struct EmOptions {
  double tol = 1e-6;   // relative change in the log objective
  int max_iter = 100;
};

struct EmResult {
  GmmPosterior posterior;
  std::vector<double> objective_trace;  // penalized log-likelihood per iterate
  bool converged = false;
  int iterations = 0;
};

// Semi-supervised MAP expectation-maximisation over labelled + pool data.
// Initialized from the supervised fit on the labelled set; each M-step folds
// soft responsibilities into the conjugate updates via effective counts.
// Hitting max_iter returns the last iterate with converged=false rather than
// throwing.
EmResult em_fit(const LabelledSet& labelled, const UnlabelledPool& pool,
                const NiwPrior& prior, const Vec& alpha,
                const EmOptions& options = {});

// The monitored objective: log-likelihood of labelled + pool data under the
// MAP parameters (mean m_n, covariance S_n/(v_n+D+2), mixing proportions
// (alpha_k+N_k-1)/(alpha_0+N-K)) plus the log prior density of those
// parameters.
double em_objective(const LabelledSet& labelled, const UnlabelledPool& pool,
                    const NiwPrior& prior, const Vec& alpha,
                    const GmmPosterior& posterior);

}  // namespace rbal

#endif  // RBAL_EM_HPP
