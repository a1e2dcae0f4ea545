#include "rbal/math.hpp"

#include <Eigen/Eigenvalues>

#include "rbal/errors.hpp"

namespace rbal {

double log_sum_exp(const Vec& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

double log_multigamma(int dim, double a) {
  double out = 0.25 * dim * (dim - 1) * std::log(M_PI);
  for (int j = 1; j <= dim; ++j) out += std::lgamma(a + 0.5 * (1 - j));
  return out;
}

GaussHermite GaussHermite::rule(int n) {
  if (n < 1) throw ConfigError("Gauss-Hermite rule needs at least one node");
  Mat jacobi = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(jacobi);
  GaussHermite rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = Vec(n);
  const double total = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    const double first = eig.eigenvectors()(0, i);
    rule.weights[i] = total * first * first;
  }
  return rule;
}

GaussHermite GaussHermite::normalized() const {
  GaussHermite out;
  out.nodes = nodes * M_SQRT2;
  out.weights = weights / std::sqrt(M_PI);
  return out;
}

Eigen::LLT<Mat> cholesky_with_jitter(const Mat& m, double jitter_scale) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter =
      jitter_scale * m.trace() / static_cast<double>(m.rows());
  Mat bumped = m;
  bumped.diagonal().array() += jitter;
  llt.compute(bumped);
  if (llt.info() != Eigen::Success) {
    throw NumericError("matrix not positive-definite after jitter");
  }
  return llt;
}

}  // namespace rbal
