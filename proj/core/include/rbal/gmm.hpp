#ifndef RBAL_GMM_HPP
#define RBAL_GMM_HPP

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rbal/decision.hpp"
#include "rbal/math.hpp"
#include "rbal/types.hpp"

namespace rbal {

// Normal-inverse-Wishart prior over a Gaussian component's mean and
// covariance.
struct NiwPrior {
  Vec mean;        // m0
  double kappa;    // kappa0 > 0
  double dof;      // v0 > D - 1
  Mat scatter;     // S0, symmetric positive-definite

  // m0 = 0, kappa0 = 1, v0 = D + 2, S0 = (v0 - D - 1) I, so the prior mean of
  // each component covariance is the identity.
  static NiwPrior default_for(int dim);
  void validate() const;
};

// Posterior NIW parameters for one class.
struct NiwParams {
  Vec mean;      // m_n
  double kappa;  // kappa_n
  double dof;    // v_n
  Mat scatter;   // S_n
};

// Supervised Bayesian Gaussian mixture: per-class NIW posteriors plus a
// Dirichlet posterior over mixing proportions. Immutable after fitting;
// prediction is read-only.
class GmmPosterior {
 public:
  GmmPosterior(std::vector<NiwParams> classes, Vec alpha, Vec counts);

  const std::vector<NiwParams>& classes() const { return classes_; }
  const NiwParams& class_params(int label) const { return classes_[label - 1]; }
  const Vec& alpha() const { return alpha_; }
  const Vec& counts() const { return counts_; }
  int dim() const { return dim_; }
  int num_classes() const { return static_cast<int>(classes_.size()); }

  // (n_k + alpha_k) / (n + alpha_0); sums to 1 exactly.
  Vec class_prior() const;

  // Student-t predictive parameters derived from the NIW posterior of one
  // class: mean m_n, scale ((kappa_n+1)/(kappa_n (v_n-D+1))) S_n, and
  // v_n - D + 1 degrees of freedom.
  struct Predictive {
    Vec mean;
    Mat scale_chol;       // lower Cholesky factor of the scale matrix
    double dof;
    double log_norm;      // log normalizing constant of the density
  };
  const Predictive& predictive(int label) const { return predictive_[label - 1]; }

  nlohmann::json to_json() const;
  static GmmPosterior from_json(const nlohmann::json& doc);

 private:
  std::vector<NiwParams> classes_;
  Vec alpha_;
  Vec counts_;
  int dim_;
  std::vector<Predictive> predictive_;
};

// Conjugate batch update of every class from the labelled data; classes with
// no members keep the prior.
GmmPosterior fit_supervised(const LabelledSet& labelled, const NiwPrior& prior,
                            const Vec& alpha);

// Shared with the EM M-step: posterior from per-class effective counts,
// weighted means and weighted uncentered scatters.
GmmPosterior fit_from_moments(const Vec& counts, const std::vector<Vec>& means,
                              const std::vector<Mat>& scatters,
                              const NiwPrior& prior, const Vec& alpha);

// Log density of the class-conditional Student-t posterior predictive.
double predictive_log_density(const Vec& x, int label,
                              const GmmPosterior& posterior);

// p(y = k | x) via Bayes' rule over the Student-t predictives and the
// Dirichlet-smoothed class prior; computed with log-sum-exp.
ClassPosterior predict_posterior(const Vec& x, const GmmPosterior& posterior);

}  // namespace rbal

#endif  // RBAL_GMM_HPP
