#include "rbal/mrvm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <nlohmann/json.hpp>

#include "rbal/errors.hpp"

namespace rbal {

namespace {

// Auxiliary-update corrections saturate once classes are separated by this
// many noise standard deviations; beyond it the quadrature underflows.
constexpr double kMaxMargin = 8.0;

const GaussHermite& normalized_rule(int nodes) {
  static std::mutex mutex;
  static std::map<int, GaussHermite> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(nodes);
  if (it == cache.end()) {
    it = cache.emplace(nodes, GaussHermite::rule(nodes).normalized()).first;
  }
  return it->second;
}

Mat active_gram(const MrvmTrainState& state) {
  const int n_active = static_cast<int>(state.active.size());
  Mat gram(n_active, state.full_gram.cols());
  for (int r = 0; r < n_active; ++r) {
    gram.row(r) = state.full_gram.row(state.active[r]);
  }
  return gram;
}

// MAP weight solve per class: (K* K*^T + diag(scales_k)) w_k = K* f_k.
// When `variances` is non-null it receives the diagonal of each class's
// posterior covariance (K* K*^T + A_k)^-1, needed by the scale update.
void solve_weights(MrvmTrainState& state, const Mat& gram, Mat* variances = nullptr) {
  const int n_active = static_cast<int>(state.active.size());
  const int k = state.num_classes;
  state.weights.resize(n_active, k);
  if (variances) variances->resize(n_active, k);
  if (n_active == 0) return;
  const Mat base = gram * gram.transpose();
  for (int c = 0; c < k; ++c) {
    Mat system = base;
    system.diagonal() += state.scales.col(c);
    Eigen::LLT<Mat> llt(system);
    if (llt.info() != Eigen::Success) {
      system.diagonal().array() += 1e-8 * system.diagonal().mean();
      llt.compute(system);
      if (llt.info() != Eigen::Success) {
        throw NumericError("mrvm: weight system singular after ridge jitter");
      }
    }
    state.weights.col(c) = llt.solve(gram * state.aux_targets.row(c).transpose());
    if (variances) {
      variances->col(c) =
          llt.solve(Mat::Identity(n_active, n_active)).diagonal();
    }
  }
}

// Truncated-Gaussian posterior means of the auxiliary variables, via
// Gauss-Hermite quadrature over the shared noise variable.
void update_aux_targets(MrvmTrainState& state, const Mat& gram,
                        const GaussHermite& rule) {
  const int n = static_cast<int>(state.full_gram.cols());
  const int k = state.num_classes;
  Mat preds = state.active.empty() ? Mat::Zero(k, n)
                                   : Mat(state.weights.transpose() * gram);
  const int nodes = static_cast<int>(rule.nodes.size());
  Vec margins(k);
  Mat cdf(nodes, k);
  for (int i = 0; i < n; ++i) {
    const int truth = state.labels[i] - 1;
    for (int c = 0; c < k; ++c) {
      margins[c] = std::clamp(preds(c, i) - preds(truth, i), -kMaxMargin, kMaxMargin);
    }
    for (int node = 0; node < nodes; ++node) {
      for (int c = 0; c < k; ++c) {
        cdf(node, c) = normal_cdf(rule.nodes[node] - margins[c]);
      }
    }
    double correction_sum = 0.0;
    for (int c = 0; c < k; ++c) {
      if (c == truth) continue;
      double numerator = 0.0;
      double denominator = 0.0;
      for (int node = 0; node < nodes; ++node) {
        double rest = 1.0;
        for (int other = 0; other < k; ++other) {
          if (other == truth || other == c) continue;
          rest *= cdf(node, other);
        }
        const double w = rule.weights[node] * rest;
        numerator += w * normal_pdf(rule.nodes[node] - margins[c]);
        denominator += w * cdf(node, c);
      }
      const double correction = numerator / std::max(denominator, 1e-300);
      state.aux_targets(c, i) = preds(c, i) - correction;
      correction_sum += correction;
    }
    state.aux_targets(truth, i) = preds(truth, i) + correction_sum;
  }
}

// Fixed-point scale update: alpha = (gamma + 2 tau)/(mu^2 + 2 nu) with the
// well-determinedness factor gamma = 1 - alpha_old * Sigma_ii. Shares its
// fixed points with the posterior-mean update (whose mu^2 + Sigma_ii second
// moment appears in mrvm_scale_update) but separates redundant samples from
// relevant ones fast enough for the 1e5 prune threshold to act on the former
// only.
void update_scales(MrvmTrainState& state, const Mat& variances,
                   const TrainHyper& hyper) {
  for (int r = 0; r < state.weights.rows(); ++r) {
    for (int c = 0; c < state.weights.cols(); ++c) {
      const double w = state.weights(r, c);
      const double gamma =
          std::max(0.0, 1.0 - state.scales(r, c) * variances(r, c));
      state.scales(r, c) =
          (gamma + 2.0 * hyper.tau) / (w * w + 2.0 * hyper.nu);
    }
  }
}

MrvmModel model_from_state(const MrvmTrainState& state,
                           const std::vector<Vec>& features,
                           const KernelConfig& kernel, const TrainHyper& hyper) {
  MrvmModel model;
  model.kernel = kernel;
  model.num_classes = state.num_classes;
  model.quad_nodes = hyper.quad_nodes;
  model.discriminative = !state.active.empty();
  model.weights = state.weights;
  model.scales = state.scales;
  for (int idx : state.active) model.active_samples.push_back(features[idx]);
  return model;
}

double relative_weight_change(const Mat& current, const Mat& previous) {
  if (current.rows() != previous.rows() || current.cols() != previous.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  const double denom = std::max(previous.norm(), 1e-12);
  return (current - previous).norm() / denom;
}

void check_labelled(const LabelledSet& labelled) {
  if (labelled.size() == 0) throw DataError("mrvm: labelled set is empty");
  for (std::size_t i = 0; i < labelled.size(); ++i) {
    if (!labelled.features[i].allFinite()) {
      throw DataError("mrvm: non-finite feature at point " + std::to_string(i + 1));
    }
    if (labelled.labels[i] < 1 || labelled.labels[i] > labelled.num_classes) {
      throw DataError("mrvm: label outside class range at point " +
                      std::to_string(i + 1));
    }
  }
}

}  // namespace

void KernelConfig::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("kernel gamma must be positive");
}

void TrainHyper::validate() const {
  if (!(tau > 0.0) || !(nu > 0.0)) throw ConfigError("mrvm: tau/nu must be positive");
  if (max_iter < 1) throw ConfigError("mrvm: max_iter must be positive");
  if (!(conv_tol > 0.0)) throw ConfigError("mrvm: conv_tol must be positive");
  if (quad_nodes < 1) throw ConfigError("mrvm: quad_nodes must be positive");
  if (!(prune_threshold > 0.0)) {
    throw ConfigError("mrvm: prune_threshold must be positive");
  }
}

Mat kernel_gram(const std::vector<Vec>& rows, const std::vector<Vec>& cols,
                const KernelConfig& kernel) {
  kernel.validate();
  Mat gram(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      gram(i, j) = std::exp(-kernel.gamma * (rows[i] - cols[j]).squaredNorm());
    }
  }
  return gram;
}

double mrvm_scale_update(double weight_second_moment, double tau, double nu) {
  return (2.0 * tau + 1.0) / (weight_second_moment + 2.0 * nu);
}

void mrvm_em_step(MrvmTrainState& state, const TrainHyper& hyper,
                  bool update_scales_flag) {
  hyper.validate();
  const Mat gram = active_gram(state);
  Mat variances;
  solve_weights(state, gram, update_scales_flag ? &variances : nullptr);
  update_aux_targets(state, gram, normalized_rule(hyper.quad_nodes));
  if (update_scales_flag) update_scales(state, variances, hyper);
}

ThetaContribution theta_contributions(const MrvmTrainState& state, int candidate) {
  const int n = static_cast<int>(state.full_gram.cols());
  if (candidate < 0 || candidate >= n) {
    throw DimensionError("theta: candidate index outside training set");
  }
  Mat c_minus = Mat::Identity(n, n);
  for (std::size_t r = 0; r < state.active.size(); ++r) {
    const int idx = state.active[r];
    if (idx == candidate) continue;
    const double alpha = state.scales(static_cast<int>(r), 0);
    c_minus.noalias() +=
        (1.0 / alpha) * state.full_gram.col(idx) * state.full_gram.col(idx).transpose();
  }
  Eigen::LLT<Mat> llt(c_minus);
  if (llt.info() != Eigen::Success) {
    c_minus.diagonal().array() += 1e-8 * c_minus.diagonal().mean();
    llt.compute(c_minus);
    if (llt.info() != Eigen::Success) {
      throw NumericError("theta: marginal covariance not invertible");
    }
  }
  const Vec solved = llt.solve(state.full_gram.col(candidate));
  ThetaContribution out;
  out.sparsity = state.full_gram.col(candidate).dot(solved);
  out.quality = state.aux_targets * solved;
  out.theta = out.quality.squaredNorm() -
              static_cast<double>(state.num_classes) * out.sparsity;
  return out;
}

MrvmModel train_mrvm1(const LabelledSet& labelled, const KernelConfig& kernel,
                      const TrainHyper& hyper) {
  check_labelled(labelled);
  kernel.validate();
  hyper.validate();
  const int n = static_cast<int>(labelled.size());
  const int k = labelled.num_classes;
  const GaussHermite& rule = normalized_rule(hyper.quad_nodes);

  MrvmTrainState state;
  state.full_gram = kernel_gram(labelled.features, labelled.features, kernel);
  state.labels = labelled.labels;
  state.num_classes = k;
  state.aux_targets = Mat::Zero(k, n);
  state.weights = Mat::Zero(0, k);
  state.scales = Mat::Zero(0, k);
  update_aux_targets(state, active_gram(state), rule);

  std::vector<double> alpha_by_index(n, 0.0);
  Mat prev_weights = state.weights;
  std::vector<int> prev_active = state.active;
  int stable = 0;

  // gram2(i, j) = k_i^T k_j; fixed across iterations.
  const Mat gram2 = state.full_gram * state.full_gram;

  for (int iter = 0; iter < hyper.max_iter; ++iter) {
    // Fast marginal-likelihood quantities against the current active basis,
    // via Woodbury on C = I + sum_m alpha_m^-1 k_m k_m^T:
    // k_i^T C^-1 k_j = gram2(i,j) - g_i^T (diag(alpha) + gram2_aa)^-1 g_j.
    const int n_active = static_cast<int>(state.active.size());
    Mat basis_gram(n_active, n);     // g rows: gram2(active member, :)
    Vec active_alpha(n_active);
    for (int r = 0; r < n_active; ++r) {
      basis_gram.row(r) = gram2.row(state.active[r]);
      active_alpha[r] = alpha_by_index[state.active[r]];
    }
    Mat solved;                      // (diag(alpha) + gram2_aa)^-1 basis_gram
    if (n_active > 0) {
      Mat core(n_active, n_active);
      for (int r = 0; r < n_active; ++r) {
        for (int c = 0; c < n_active; ++c) {
          core(r, c) = gram2(state.active[r], state.active[c]);
        }
      }
      core.diagonal() += active_alpha;
      Eigen::LLT<Mat> llt(core);
      if (llt.info() != Eigen::Success) {
        core.diagonal().array() += 1e-8 * core.diagonal().mean();
        llt.compute(core);
        if (llt.info() != Eigen::Success) {
          throw NumericError("mrvm1: marginal covariance factorization failed");
        }
      }
      solved = llt.solve(basis_gram);
    }
    const Mat aux_gram = state.aux_targets * state.full_gram;  // f_k^T k_i
    Vec theta(n);
    Vec sparsity(n);
    for (int i = 0; i < n; ++i) {
      double s = gram2(i, i);
      Vec q = aux_gram.col(i);
      if (n_active > 0) {
        const Vec g_i = basis_gram.col(i);
        const Vec solved_i = solved.col(i);
        s -= g_i.dot(solved_i);
        qode_noop:;
        Mat fB(k, n_active);
        for (int r = 0; r < n_active; ++r) fB.col(r) = aux_gram.col(state.active[r]);
        q -= fB * solved_i;
      }
      if (std::binary_search(state.active.begin(), state.active.end(), i)) {
        const double alpha = alpha_by_index[i];
        const double denom = std::max(alpha - s, 1e-12);
        q *= alpha / denom;
        s = alpha * s / denom;
      }
      sparsity[i] = s;
      theta[i] = q.squaredNorm() - static_cast<double>(k) * s;
    }

    // Keep and re-estimate every positive contributor already in the set,
    // drop the rest, then admit the strongest new candidate (samples may
    // re-enter later).
    std::vector<int> next_active;
    for (int idx : state.active) {
      if (theta[idx] > 0.0) {
        next_active.push_back(idx);
        alpha_by_index[idx] =
            static_cast<double>(k) * sparsity[idx] * sparsity[idx] / theta[idx];
      }
    }
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (theta[i] <= 0.0) continue;
      if (std::binary_search(state.active.begin(), state.active.end(), i)) continue;
      if (best < 0 || theta[i] > theta[best]) best = i;
    }
    if (best >= 0) {
      alpha_by_index[best] =
          static_cast<double>(k) * sparsity[best] * sparsity[best] / theta[best];
      next_active.insert(
          std::upper_bound(next_active.begin(), next_active.end(), best), best);
    }
    state.active = std::move(next_active);
    if (state.active.empty()) break;  // nothing contributes: degenerate model

    const int n_active = static_cast<int>(state.active.size());
    state.scales.resize(n_active, k);
    for (int r = 0; r < n_active; ++r) {
      state.scales.row(r).setConstant(alpha_by_index[state.active[r]]);
    }

    const Mat gram = active_gram(state);
    solve_weights(state, gram);
    update_aux_targets(state, gram, rule);

    const bool same_set = state.active == prev_active;
    const bool small_change =
        relative_weight_change(state.weights, prev_weights) < hyper.conv_tol;
    stable = (same_set && small_change) ? stable + 1 : 0;
    prev_active = state.active;
    prev_weights = state.weights;
    if (stable >= 3) break;
  }

  if (state.active.empty()) {
    state.weights = Mat::Zero(0, k);
    state.scales = Mat::Zero(0, k);
  }
  return model_from_state(state, labelled.features, kernel, hyper);
}

MrvmModel train_mrvm2(const LabelledSet& labelled, const KernelConfig& kernel,
                      const TrainHyper& hyper) {
  check_labelled(labelled);
  kernel.validate();
  hyper.validate();
  const int n = static_cast<int>(labelled.size());
  const int k = labelled.num_classes;
  const GaussHermite& rule = normalized_rule(hyper.quad_nodes);

  MrvmTrainState state;
  state.full_gram = kernel_gram(labelled.features, labelled.features, kernel);
  state.labels = labelled.labels;
  state.num_classes = k;
  state.aux_targets = Mat::Zero(k, n);
  state.active.resize(n);
  for (int i = 0; i < n; ++i) state.active[i] = i;
  state.weights = Mat::Zero(n, k);
  state.scales = Mat::Ones(n, k);
  update_aux_targets(state, active_gram(state), rule);

  Mat prev_weights = state.weights;
  std::vector<int> prev_active = state.active;
  int stable = 0;

  for (int iter = 0; iter < hyper.max_iter; ++iter) {
    const Mat gram = active_gram(state);
    Mat variances;
    solve_weights(state, gram, &variances);
    update_aux_targets(state, gram, rule);
    update_scales(state, variances, hyper);

    // Prune samples whose weights are negligible for every class (the
    // point-evaluated scale update exceeds the threshold in each class);
    // pruned samples never re-enter within this call. Their stored scales
    // are completed to those point values first.
    std::vector<int> keep;
    for (std::size_t r = 0; r < state.active.size(); ++r) {
      const int row = static_cast<int>(r);
      bool prune = true;
      for (int c = 0; c < k; ++c) {
        const double w = state.weights(row, c);
        if (mrvm_scale_update(w * w, hyper.tau, hyper.nu) <= hyper.prune_threshold) {
          prune = false;
          break;
        }
      }
      if (prune) {
        for (int c = 0; c < k; ++c) {
          const double w = state.weights(row, c);
          state.scales(row, c) = mrvm_scale_update(w * w, hyper.tau, hyper.nu);
        }
        continue;
      }
      keep.push_back(row);
    }
    if (keep.empty()) throw NumericError("mrvm2: empty relevance set");
    if (keep.size() != state.active.size()) {
      std::vector<int> next_active;
      Mat next_weights(keep.size(), k);
      Mat next_scales(keep.size(), k);
      for (std::size_t r = 0; r < keep.size(); ++r) {
        next_active.push_back(state.active[keep[r]]);
        next_weights.row(static_cast<int>(r)) = state.weights.row(keep[r]);
        next_scales.row(static_cast<int>(r)) = state.scales.row(keep[r]);
      }
      state.active = std::move(next_active);
      state.weights = std::move(next_weights);
      state.scales = std::move(next_scales);
    }

    const bool same_set = state.active == prev_active;
    const bool small_change =
        relative_weight_change(state.weights, prev_weights) < hyper.conv_tol;
    stable = (same_set && small_change) ? stable + 1 : 0;
    prev_active = state.active;
    prev_weights = state.weights;
    if (stable >= 3) break;
  }
  return model_from_state(state, labelled.features, kernel, hyper);
}

Vec probit_probs_raw(const Vec& f, int quad_nodes) {
  const GaussHermite& rule = normalized_rule(quad_nodes);
  const int k = static_cast<int>(f.size());
  const int nodes = static_cast<int>(rule.nodes.size());
  Vec probs = Vec::Zero(k);
  for (int c = 0; c < k; ++c) {
    double total = 0.0;
    for (int node = 0; node < nodes; ++node) {
      double product = 1.0;
      for (int other = 0; other < k; ++other) {
        if (other == c) continue;
        product *= normal_cdf(rule.nodes[node] + f[c] - f[other]);
      }
      total += rule.weights[node] * product;
    }
    probs[c] = total;
  }
  return probs;
}

ClassPosterior probit_class_probs(const MrvmModel& model, const Vec& x,
                                  int quad_nodes) {
  ClassPosterior out;
  if (!model.discriminative || model.relevance_count() == 0) {
    return ClassPosterior::uniform(model.num_classes);
  }
  Vec basis(model.relevance_count());
  for (int i = 0; i < model.relevance_count(); ++i) {
    basis[i] =
        std::exp(-model.kernel.gamma * (model.active_samples[i] - x).squaredNorm());
  }
  const Vec f = model.weights.transpose() * basis;
  Vec probs = probit_probs_raw(f, quad_nodes);
  const double total = probs.sum();
  if (!(total > 0.0)) return ClassPosterior::uniform(model.num_classes);
  out.probs = probs / total;
  return out;
}

ClassPosterior mrvm_predict(const MrvmModel& model, const Vec& x) {
  return probit_class_probs(model, x, model.quad_nodes);
}

nlohmann::json MrvmModel::to_json() const {
  nlohmann::json doc;
  doc["gamma"] = kernel.gamma;
  doc["num_classes"] = num_classes;
  doc["quad_nodes"] = quad_nodes;
  doc["discriminative"] = discriminative;
  nlohmann::json samples = nlohmann::json::array();
  for (const Vec& s : active_samples) {
    samples.push_back(std::vector<double>(s.data(), s.data() + s.size()));
  }
  doc["active_samples"] = std::move(samples);
  auto matrix_to_json = [](const Mat& m) {
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < m.rows(); ++r) {
      rows.emplace_back(m.row(r).begin(), m.row(r).end());
    }
    return rows;
  };
  doc["weights"] = matrix_to_json(weights);
  doc["scales"] = matrix_to_json(scales);
  return doc;
}

MrvmModel MrvmModel::from_json(const nlohmann::json& doc) {
  try {
    MrvmModel model;
    model.kernel.gamma = doc.at("gamma").get<double>();
    model.num_classes = doc.at("num_classes").get<int>();
    model.quad_nodes = doc.at("quad_nodes").get<int>();
    model.discriminative = doc.at("discriminative").get<bool>();
    for (const auto& entry : doc.at("active_samples")) {
      const auto values = entry.get<std::vector<double>>();
      model.active_samples.push_back(
          Eigen::Map<const Vec>(values.data(), values.size()));
    }
    auto matrix_from_json = [](const nlohmann::json& rows_json, int cols) {
      const auto rows = rows_json.get<std::vector<std::vector<double>>>();
      Mat m(rows.size(), cols);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (int c = 0; c < cols; ++c) m(static_cast<int>(r), c) = rows[r][c];
      }
      return m;
    };
    model.weights = matrix_from_json(doc.at("weights"), model.num_classes);
    model.scales = matrix_from_json(doc.at("scales"), model.num_classes);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mrvm model json: ") + e.what());
  }
}

}  // namespace rbal
