#include "rbal/gmm.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "rbal/errors.hpp"

namespace rbal {

NiwPrior NiwPrior::default_for(int dim) {
  NiwPrior prior;
  prior.mean = Vec::Zero(dim);
  prior.kappa = 1.0;
  prior.dof = dim + 2.0;
  prior.scatter = (prior.dof - dim - 1.0) * Mat::Identity(dim, dim);
  return prior;
}

void NiwPrior::validate() const {
  const int dim = static_cast<int>(mean.size());
  if (dim < 1) throw ConfigError("NIW prior: empty mean");
  if (!(kappa > 0.0)) throw ConfigError("NIW prior: kappa must be positive");
  if (!(dof > dim - 1.0)) throw ConfigError("NIW prior: dof must exceed D - 1");
  if (scatter.rows() != dim || scatter.cols() != dim) {
    throw ConfigError("NIW prior: scatter shape mismatch");
  }
  Eigen::LLT<Mat> llt(scatter);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("NIW prior: scatter not positive-definite");
  }
}

GmmPosterior::GmmPosterior(std::vector<NiwParams> classes, Vec alpha, Vec counts)
    : classes_(std::move(classes)),
      alpha_(std::move(alpha)),
      counts_(std::move(counts)) {
  const int k = static_cast<int>(classes_.size());
  if (k < 1) throw ConfigError("GMM posterior needs at least one class");
  if (alpha_.size() != k || counts_.size() != k) {
    throw ConfigError("GMM posterior: alpha/count lengths must match class count");
  }
  if (alpha_.minCoeff() <= 0.0) {
    throw ConfigError("GMM posterior: Dirichlet concentrations must be positive");
  }
  if (counts_.minCoeff() < 0.0) {
    throw ConfigError("GMM posterior: counts must be nonnegative");
  }
  dim_ = static_cast<int>(classes_[0].mean.size());

  predictive_.reserve(k);
  for (const NiwParams& c : classes_) {
    if (c.mean.size() != dim_ || c.scatter.rows() != dim_ || c.scatter.cols() != dim_) {
      throw DimensionError("GMM posterior: inconsistent class dimensions");
    }
    Predictive pred;
    pred.mean = c.mean;
    pred.dof = c.dof - dim_ + 1.0;
    if (!(pred.dof > 0.0)) {
      throw NumericError("GMM posterior: nonpositive predictive degrees of freedom");
    }
    const Mat scale = ((c.kappa + 1.0) / (c.kappa * pred.dof)) * c.scatter;
    const Eigen::LLT<Mat> llt = cholesky_with_jitter(scale);
    pred.scale_chol = llt.matrixL();
    double log_det = 0.0;
    for (int d = 0; d < dim_; ++d) log_det += 2.0 * std::log(pred.scale_chol(d, d));
    pred.log_norm = std::lgamma(0.5 * (pred.dof + dim_)) -
                    std::lgamma(0.5 * pred.dof) -
                    0.5 * dim_ * std::log(pred.dof * M_PI) - 0.5 * log_det;
    predictive_.push_back(std::move(pred));
  }
}

Vec GmmPosterior::class_prior() const {
  const double total = counts_.sum() + alpha_.sum();
  return (counts_ + alpha_) / total;
}

nlohmann::json GmmPosterior::to_json() const {
  nlohmann::json doc;
  doc["dim"] = dim_;
  doc["alpha"] = std::vector<double>(alpha_.data(), alpha_.data() + alpha_.size());
  doc["counts"] = std::vector<double>(counts_.data(), counts_.data() + counts_.size());
  nlohmann::json cls = nlohmann::json::array();
  for (const NiwParams& c : classes_) {
    nlohmann::json entry;
    entry["mean"] = std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size());
    entry["kappa"] = c.kappa;
    entry["dof"] = c.dof;
    std::vector<std::vector<double>> scatter;
    for (int r = 0; r < c.scatter.rows(); ++r) {
      scatter.emplace_back(c.scatter.row(r).begin(), c.scatter.row(r).end());
    }
    entry["scatter"] = scatter;
    cls.push_back(std::move(entry));
  }
  doc["classes"] = std::move(cls);
  return doc;
}

GmmPosterior GmmPosterior::from_json(const nlohmann::json& doc) {
  try {
    const int dim = doc.at("dim").get<int>();
    const auto alpha_v = doc.at("alpha").get<std::vector<double>>();
    const auto counts_v = doc.at("counts").get<std::vector<double>>();
    std::vector<NiwParams> classes;
    for (const auto& entry : doc.at("classes")) {
      NiwParams c;
      const auto mean = entry.at("mean").get<std::vector<double>>();
      c.mean = Eigen::Map<const Vec>(mean.data(), mean.size());
      c.kappa = entry.at("kappa").get<double>();
      c.dof = entry.at("dof").get<double>();
      const auto scatter = entry.at("scatter").get<std::vector<std::vector<double>>>();
      c.scatter = Mat(dim, dim);
      for (int r = 0; r < dim; ++r) {
        for (int col = 0; col < dim; ++col) c.scatter(r, col) = scatter[r][col];
      }
      classes.push_back(std::move(c));
    }
    Vec alpha = Eigen::Map<const Vec>(alpha_v.data(), alpha_v.size());
    Vec counts = Eigen::Map<const Vec>(counts_v.data(), counts_v.size());
    return GmmPosterior(std::move(classes), std::move(alpha), std::move(counts));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("gmm posterior json: ") + e.what());
  }
}

GmmPosterior fit_from_moments(const Vec& counts, const std::vector<Vec>& means,
                              const std::vector<Mat>& scatters,
                              const NiwPrior& prior, const Vec& alpha) {
  prior.validate();
  const int k = static_cast<int>(counts.size());
  const int dim = static_cast<int>(prior.mean.size());
  std::vector<NiwParams> classes(k);
  for (int c = 0; c < k; ++c) {
    NiwParams& post = classes[c];
    const double n_k = counts[c];
    post.kappa = prior.kappa + n_k;
    post.dof = prior.dof + n_k;
    if (n_k > 0.0) {
      post.mean = (prior.kappa * prior.mean + n_k * means[c]) / post.kappa;
      post.scatter = prior.scatter + scatters[c] +
                     prior.kappa * prior.mean * prior.mean.transpose() -
                     post.kappa * post.mean * post.mean.transpose();
      // Symmetrize away accumulated rounding before the Cholesky.
      post.scatter = 0.5 * (post.scatter + post.scatter.transpose());
    } else {
      post.mean = prior.mean;
      post.scatter = prior.scatter;
    }
    if (post.mean.size() != dim) {
      throw DimensionError("gmm fit: class moment dimension mismatch");
    }
  }
  return GmmPosterior(std::move(classes), alpha, counts);
}

GmmPosterior fit_supervised(const LabelledSet& labelled, const NiwPrior& prior,
                            const Vec& alpha) {
  if (labelled.size() == 0) throw DataError("gmm fit: labelled set is empty");
  const int k = labelled.num_classes;
  if (k < 1) throw DataError("gmm fit: labelled set has no class count");
  if (alpha.size() != k) {
    throw DimensionError("gmm fit: alpha length must equal class count");
  }
  const int dim = labelled.dim();
  if (static_cast<int>(prior.mean.size()) != dim) {
    throw DimensionError("gmm fit: prior dimension does not match data");
  }

  Vec counts = Vec::Zero(k);
  std::vector<Vec> sums(k, Vec::Zero(dim));
  std::vector<Mat> scatters(k, Mat::Zero(dim, dim));
  for (std::size_t i = 0; i < labelled.size(); ++i) {
    const Vec& x = labelled.features[i];
    if (static_cast<int>(x.size()) != dim) {
      throw DimensionError("gmm fit: feature dimension mismatch at point " +
                           std::to_string(i + 1));
    }
    if (!x.allFinite()) {
      throw DataError("gmm fit: non-finite feature at point " + std::to_string(i + 1));
    }
    const int label = labelled.labels[i];
    if (label < 1 || label > k) {
      throw DataError("gmm fit: label outside {1.." + std::to_string(k) + "}");
    }
    counts[label - 1] += 1.0;
    sums[label - 1] += x;
    scatters[label - 1] += x * x.transpose();
  }
  std::vector<Vec> means(k, Vec::Zero(dim));
  for (int c = 0; c < k; ++c) {
    if (counts[c] > 0.0) means[c] = sums[c] / counts[c];
  }
  return fit_from_moments(counts, means, scatters, prior, alpha);
}

double predictive_log_density(const Vec& x, int label,
                              const GmmPosterior& posterior) {
  if (label < 1 || label > posterior.num_classes()) {
    throw DataError("predictive density: label outside class range");
  }
  if (static_cast<int>(x.size()) != posterior.dim()) {
    throw DimensionError("predictive density: feature dimension mismatch");
  }
  const GmmPosterior::Predictive& pred = posterior.predictive(label);
  const Vec z = pred.scale_chol.triangularView<Eigen::Lower>().solve(x - pred.mean);
  const double mahal = z.squaredNorm();
  return pred.log_norm -
         0.5 * (pred.dof + posterior.dim()) * std::log1p(mahal / pred.dof);
}

ClassPosterior predict_posterior(const Vec& x, const GmmPosterior& posterior) {
  const int k = posterior.num_classes();
  const Vec prior = posterior.class_prior();
  Vec log_joint(k);
  for (int c = 0; c < k; ++c) {
    log_joint[c] = predictive_log_density(x, c + 1, posterior) + std::log(prior[c]);
  }
  const double log_evidence = log_sum_exp(log_joint);
  ClassPosterior out;
  out.probs = (log_joint.array() - log_evidence).exp();
  out.probs /= out.probs.sum();
  return out;
}

}  // namespace rbal
