#include "rbal/em.hpp"

#include <cmath>

#include "rbal/errors.hpp"

namespace rbal {

namespace {

Vec labelled_counts(const LabelledSet& labelled, int num_classes) {
  Vec counts = Vec::Zero(num_classes);
  for (int label : labelled.labels) {
    if (label < 1 || label > num_classes) {
      throw DataError("em: label outside {1.." + std::to_string(num_classes) + "}");
    }
    counts[label - 1] += 1.0;
  }
  return counts;
}

// MAP point estimates implied by a fitted posterior.
struct MapParams {
  std::vector<Vec> means;
  std::vector<Mat> cov_chols;
  std::vector<double> log_dets;
  Vec mixing;

  static MapParams from(const GmmPosterior& posterior, const Vec& alpha) {
    const int k = posterior.num_classes();
    const int dim = posterior.dim();
    MapParams map;
    map.means.reserve(k);
    map.cov_chols.reserve(k);
    map.log_dets.reserve(k);
    const double denom = alpha.sum() + posterior.counts().sum() - k;
    if (!(denom > 0.0)) {
      throw NumericError("em: MAP mixing denominator is nonpositive");
    }
    map.mixing = (alpha + posterior.counts() - Vec::Ones(k)) / denom;
    if (map.mixing.minCoeff() < 0.0) {
      throw NumericError("em: MAP mixing proportion is negative "
                         "(alpha entries below 1 with empty classes)");
    }
    for (int c = 0; c < k; ++c) {
      const NiwParams& params = posterior.classes()[c];
      map.means.push_back(params.mean);
      const Mat cov = params.scatter / (params.dof + dim + 2.0);
      const Eigen::LLT<Mat> llt = cholesky_with_jitter(cov);
      map.cov_chols.push_back(llt.matrixL());
      double log_det = 0.0;
      for (int d = 0; d < dim; ++d) log_det += 2.0 * std::log(map.cov_chols.back()(d, d));
      map.log_dets.push_back(log_det);
    }
    return map;
  }

  double log_gaussian(const Vec& x, int c) const {
    const int dim = static_cast<int>(x.size());
    const Vec z = cov_chols[c].triangularView<Eigen::Lower>().solve(x - means[c]);
    return -0.5 * dim * std::log(2.0 * M_PI) - 0.5 * log_dets[c] -
           0.5 * z.squaredNorm();
  }
};

Mat map_responsibilities(const UnlabelledPool& pool, const MapParams& map, int k) {
  Mat r(pool.size(), k);
  Vec log_joint(k);
  for (std::size_t t = 0; t < pool.size(); ++t) {
    for (int c = 0; c < k; ++c) {
      log_joint[c] = (map.mixing[c] > 0.0 ? std::log(map.mixing[c])
                                          : -std::numeric_limits<double>::infinity()) +
                     map.log_gaussian(pool.observations[t].features, c);
    }
    const double lse = log_sum_exp(log_joint);
    for (int c = 0; c < k; ++c) r(t, c) = std::exp(log_joint[c] - lse);
    r.row(t) /= r.row(t).sum();
  }
  return r;
}

// log NIW(mean, cov | prior) + constant-free bookkeeping kept exact.
double log_niw_density(const Vec& mean, const Mat& cov_chol, double cov_log_det,
                       const NiwPrior& prior) {
  const int dim = static_cast<int>(mean.size());
  const Vec z = cov_chol.triangularView<Eigen::Lower>().solve(mean - prior.mean);
  const double log_normal = -0.5 * dim * std::log(2.0 * M_PI) +
                            0.5 * dim * std::log(prior.kappa) -
                            0.5 * cov_log_det - 0.5 * prior.kappa * z.squaredNorm();

  const Eigen::LLT<Mat> prior_llt(prior.scatter);
  double prior_log_det = 0.0;
  const Mat prior_l = prior_llt.matrixL();
  for (int d = 0; d < dim; ++d) prior_log_det += 2.0 * std::log(prior_l(d, d));

  // tr(S0 Sigma^-1) via triangular solves.
  const Mat inv_l_s0 = cov_chol.triangularView<Eigen::Lower>().solve(prior.scatter);
  const Mat inv_cov_s0 =
      cov_chol.transpose().triangularView<Eigen::Upper>().solve(inv_l_s0);
  const double trace_term = inv_cov_s0.trace();

  const double log_iw = 0.5 * prior.dof * prior_log_det -
                        0.5 * prior.dof * dim * std::log(2.0) -
                        log_multigamma(dim, 0.5 * prior.dof) -
                        0.5 * (prior.dof + dim + 1.0) * cov_log_det -
                        0.5 * trace_term;
  return log_normal + log_iw;
}

}  // namespace

Responsibilities e_step(const UnlabelledPool& pool, const LabelledSet& labelled,
                        const GmmPosterior& posterior) {
  const int k = posterior.num_classes();
  if (pool.dim() != 0 && pool.dim() != posterior.dim()) {
    throw DimensionError("e_step: pool dimension does not match posterior");
  }
  Responsibilities out;
  out.matrix = Mat(pool.size(), k);
  for (std::size_t t = 0; t < pool.size(); ++t) {
    out.matrix.row(t) =
        predict_posterior(pool.observations[t].features, posterior).probs;
  }
  out.labelled_deltas = Mat::Zero(labelled.size(), k);
  for (std::size_t i = 0; i < labelled.size(); ++i) {
    out.labelled_deltas(i, labelled.labels[i] - 1) = 1.0;
  }
  out.effective_counts = pool.size() > 0 ? Vec(out.matrix.colwise().sum())
                                         : Vec(Vec::Zero(k));
  out.total_counts = labelled_counts(labelled, k) + out.effective_counts;
  return out;
}

double em_objective(const LabelledSet& labelled, const UnlabelledPool& pool,
                    const NiwPrior& prior, const Vec& alpha,
                    const GmmPosterior& posterior) {
  const int k = posterior.num_classes();
  const MapParams map = MapParams::from(posterior, alpha);

  double objective = 0.0;
  Vec log_joint(k);
  for (std::size_t t = 0; t < pool.size(); ++t) {
    for (int c = 0; c < k; ++c) {
      log_joint[c] = (map.mixing[c] > 0.0 ? std::log(map.mixing[c])
                                          : -std::numeric_limits<double>::infinity()) +
                     map.log_gaussian(pool.observations[t].features, c);
    }
    objective += log_sum_exp(log_joint);
  }
  for (std::size_t i = 0; i < labelled.size(); ++i) {
    const int c = labelled.labels[i] - 1;
    objective += std::log(map.mixing[c]) + map.log_gaussian(labelled.features[i], c);
  }

  int dim = posterior.dim();
  for (int c = 0; c < k; ++c) {
    const Mat cov = posterior.classes()[c].scatter /
                    (posterior.classes()[c].dof + dim + 2.0);
    const Eigen::LLT<Mat> llt = cholesky_with_jitter(cov);
    const Mat l = llt.matrixL();
    double log_det = 0.0;
    for (int d = 0; d < dim; ++d) log_det += 2.0 * std::log(l(d, d));
    objective += log_niw_density(posterior.classes()[c].mean, l, log_det, prior);
  }
  // Dirichlet log density over the MAP mixing proportions.
  objective += std::lgamma(alpha.sum());
  for (int c = 0; c < k; ++c) {
    objective -= std::lgamma(alpha[c]);
    if (alpha[c] != 1.0) {
      objective += (alpha[c] - 1.0) * std::log(map.mixing[c]);
    }
  }
  return objective;
}

EmResult em_fit(const LabelledSet& labelled, const UnlabelledPool& pool,
                const NiwPrior& prior, const Vec& alpha,
                const EmOptions& options) {
  if (labelled.size() == 0) throw DataError("em_fit: labelled set is empty");
  const int k = labelled.num_classes;
  const int dim = labelled.dim();

  GmmPosterior posterior = fit_supervised(labelled, prior, alpha);
  EmResult result{posterior, {}, false, 0};
  if (pool.size() == 0) {
    result.converged = true;
    return result;
  }

  const Vec lab_counts = labelled_counts(labelled, k);
  std::vector<Vec> lab_sums(k, Vec::Zero(dim));
  std::vector<Mat> lab_scatters(k, Mat::Zero(dim, dim));
  for (std::size_t i = 0; i < labelled.size(); ++i) {
    const int c = labelled.labels[i] - 1;
    lab_sums[c] += labelled.features[i];
    lab_scatters[c] += labelled.features[i] * labelled.features[i].transpose();
  }

  double objective = em_objective(labelled, pool, prior, alpha, result.posterior);
  result.objective_trace.push_back(objective);

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    // E-step at the current MAP point; keeps the monitored objective an exact
    // MAP-EM ascent. The first iterate's responsibilities coincide with
    // e_step's predictive rows in the large-count limit.
    const MapParams map = MapParams::from(result.posterior, alpha);
    const Mat resp = map_responsibilities(pool, map, k);

    Vec counts = lab_counts;
    std::vector<Vec> sums = lab_sums;
    std::vector<Mat> scatters = lab_scatters;
    for (std::size_t t = 0; t < pool.size(); ++t) {
      const Vec& x = pool.observations[t].features;
      for (int c = 0; c < k; ++c) {
        const double r = resp(t, c);
        counts[c] += r;
        sums[c] += r * x;
        scatters[c] += r * (x * x.transpose());
      }
    }
    std::vector<Vec> means(k, Vec::Zero(dim));
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) means[c] = sums[c] / counts[c];
    }
    result.posterior = fit_from_moments(counts, means, scatters, prior, alpha);
    result.iterations = iter;

    const double next = em_objective(labelled, pool, prior, alpha, result.posterior);
    result.objective_trace.push_back(next);
    if (std::abs(next - objective) < options.tol * (1.0 + std::abs(objective))) {
      result.converged = true;
      break;
    }
    objective = next;
  }
  return result;
}

}  // namespace rbal
