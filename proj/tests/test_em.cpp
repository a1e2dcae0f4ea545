#include <doctest.h>

#include <rbal/em.hpp>
#include <rbal/errors.hpp>
#include <rbal/rng.hpp>

#include "support/toy_data.hpp"

using namespace rbal;
using namespace rbal::testing;

namespace {

UnlabelledPool pool_from(const std::vector<Vec>& features, int num_classes) {
  UnlabelledPool pool;
  pool.num_classes = num_classes;
  for (std::size_t i = 0; i < features.size(); ++i) {
    Observation obs;
    obs.features = features[i];
    obs.time_index = static_cast<std::int64_t>(i);
    pool.observations.push_back(std::move(obs));
    pool.hidden_labels.push_back(1);
  }
  return pool;
}

}  // namespace

TEST_CASE("e_step: labelled rows are Kronecker deltas, pool rows normalize") {
  const LabelledSet labelled = separable_labelled(3, 5);
  const GmmPosterior posterior =
      fit_supervised(labelled, NiwPrior::default_for(2), Vec::Ones(4));
  const UnlabelledPool pool =
      pool_from({vec2(0.2, -0.1), vec2(6.3, 5.8), vec2(11.5, 12.4)}, 4);

  LabelledSet one;
  one.num_classes = 4;
  one.add(vec2(6.0, 6.0), 2);
  const Responsibilities resp = e_step(pool, one, posterior);
  CHECK(resp.labelled_deltas.rows() == 1);
  CHECK(resp.labelled_deltas(0, 0) == 0.0);
  CHECK(resp.labelled_deltas(0, 1) == 1.0);
  CHECK(resp.labelled_deltas(0, 2) == 0.0);
  CHECK(resp.labelled_deltas(0, 3) == 0.0);

  for (int t = 0; t < resp.matrix.rows(); ++t) {
    CHECK(resp.matrix.row(t).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(resp.matrix.row(t).minCoeff() >= 0.0);
  }
  CHECK(resp.effective_counts.isApprox(resp.matrix.colwise().sum().transpose()));
  CHECK(resp.total_counts.sum() ==
        doctest::Approx(static_cast<double>(pool.size() + one.size())).epsilon(1e-9));
}

namespace {

// The crisp-assignment examples need a prior whose mean agrees with the data
// (a strong zero-mean prior inflates the scatters of clusters far from the
// origin and blurs the predictives).
NiwPrior weak_mean_prior() {
  NiwPrior prior = NiwPrior::default_for(2);
  prior.kappa = 0.01;
  return prior;
}

}  // namespace

TEST_CASE("e_step: pool point at a well-separated class mean is confidently assigned") {
  const LabelledSet labelled = separable_labelled(6, 8);
  const GmmPosterior posterior =
      fit_supervised(labelled, weak_mean_prior(), Vec::Ones(4));
  const Vec class3_mean = posterior.class_params(3).mean;
  const Responsibilities resp = e_step(pool_from({class3_mean}, 4), labelled, posterior);
  CHECK(resp.matrix(0, 2) > 0.99);
}

TEST_CASE("em_fit with an empty pool equals the supervised fit") {
  const LabelledSet labelled = separable_labelled(4, 21);
  const NiwPrior prior = NiwPrior::default_for(2);
  const GmmPosterior supervised = fit_supervised(labelled, prior, Vec::Ones(4));
  const EmResult result = em_fit(labelled, UnlabelledPool{}, prior, Vec::Ones(4));
  CHECK(result.converged);
  for (int c = 1; c <= 4; ++c) {
    CHECK(result.posterior.class_params(c).mean.isApprox(
        supervised.class_params(c).mean, 1e-10));
    CHECK(result.posterior.class_params(c).scatter.isApprox(
        supervised.class_params(c).scatter, 1e-10));
    CHECK(result.posterior.class_params(c).kappa ==
          doctest::Approx(supervised.class_params(c).kappa));
  }
}

TEST_CASE("one pool point at a class mean raises that class count by about one") {
  const LabelledSet labelled = separable_labelled(6, 13);
  const NiwPrior prior = weak_mean_prior();
  const GmmPosterior supervised = fit_supervised(labelled, prior, Vec::Ones(4));
  const UnlabelledPool pool = pool_from({supervised.class_params(2).mean}, 4);
  const EmResult result = em_fit(labelled, pool, prior, Vec::Ones(4));
  CHECK(result.posterior.counts()[1] == doctest::Approx(7.0).epsilon(0.01));
  // Counts conservation: sum_k N_k = n + m.
  CHECK(result.posterior.counts().sum() ==
        doctest::Approx(static_cast<double>(labelled.size() + pool.size()))
            .epsilon(1e-12));
}

TEST_CASE("objective trace is non-decreasing within slack") {
  Rng rng(3);
  for (int trial = 0; trial < 4; ++trial) {
    const LabelledSet labelled = separable_labelled(3, 100 + trial, 5.0, 0.6);
    std::vector<Vec> extra;
    for (int c = 0; c < 4; ++c) {
      for (int i = 0; i < 25; ++i) {
        extra.push_back(vec2(c * 5.0 + 0.6 * rng.normal(), c * 5.0 + 0.6 * rng.normal()));
      }
    }
    const EmResult result = em_fit(labelled, pool_from(extra, 4),
                                   NiwPrior::default_for(2), Vec::Ones(4));
    REQUIRE(result.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < result.objective_trace.size(); ++i) {
      CHECK(result.objective_trace[i] - result.objective_trace[i - 1] >= -1e-8);
    }
    CHECK(result.converged);
  }
}

TEST_CASE("MAP mixing proportions sum to one") {
  const LabelledSet labelled = separable_labelled(4, 55);
  std::vector<Vec> extra = {vec2(0.1, 0.1), vec2(6.2, 6.2), vec2(12.0, 11.8)};
  const Vec alpha = Vec::Ones(4);
  const EmResult result =
      em_fit(labelled, pool_from(extra, 4), NiwPrior::default_for(2), alpha);
  const Vec counts = result.posterior.counts();
  const double denom = alpha.sum() + counts.sum() - 4.0;
  const Vec mixing = (alpha + counts - Vec::Ones(4)) / denom;
  CHECK(mixing.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("duplicated hidden labels converge to the doubled supervised fit") {
  const LabelledSet labelled = separable_labelled(8, 71, 8.0, 0.25);
  // Pool = the same points with labels hidden.
  const UnlabelledPool pool = pool_from(labelled.features, 4);
  LabelledSet doubled = labelled;
  for (std::size_t i = 0; i < labelled.size(); ++i) {
    doubled.add(labelled.features[i], labelled.labels[i]);
  }
  const NiwPrior prior = weak_mean_prior();
  const GmmPosterior target = fit_supervised(doubled, prior, Vec::Ones(4));
  const EmResult result = em_fit(labelled, pool, prior, Vec::Ones(4));
  for (int c = 1; c <= 4; ++c) {
    CHECK((result.posterior.class_params(c).mean - target.class_params(c).mean)
              .norm() < 1e-3);
    CHECK(std::abs(result.posterior.class_params(c).kappa -
                   target.class_params(c).kappa) < 1e-3);
  }
}

TEST_CASE("max_iter exhaustion returns the last iterate without throwing") {
  const LabelledSet labelled = separable_labelled(3, 19, 2.0, 1.0);
  std::vector<Vec> extra;
  Rng rng(4);
  for (int i = 0; i < 40; ++i) {
    extra.push_back(vec2(4.0 * rng.normal(), 4.0 * rng.normal()));
  }
  EmOptions options;
  options.max_iter = 1;
  options.tol = 1e-15;
  const EmResult result = em_fit(labelled, pool_from(extra, 4),
                                 NiwPrior::default_for(2), Vec::Ones(4), options);
  CHECK_FALSE(result.converged);
  CHECK(result.iterations == 1);
}
