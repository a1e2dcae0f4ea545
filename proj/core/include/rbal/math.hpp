#ifndef RBAL_MATH_HPP
#define RBAL_MATH_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace rbal {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.3989422804014326779;
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double log_sum_exp(const Vec& v);

// log Gamma_D(a), the multivariate gamma function.
double log_multigamma(int dim, double a);

// Gauss-Hermite rule for the physicists' weight exp(-x^2), computed via
// Golub-Welsch. For u ~ N(0,1), E[g(u)] ~= sum_i weight(i) * g(node(i)) after
// the change of variables folded in by normalized().
struct GaussHermite {
  Vec nodes;    // abscissae of the e^{-x^2} rule
  Vec weights;  // matching weights

  static GaussHermite rule(int n);

  // Nodes/weights pre-transformed so that E_{u~N(0,1)}[g(u)] ~= sum w_i g(x_i).
  GaussHermite normalized() const;
};

// Cholesky factorization that retries with a small diagonal jitter
// (scale * trace/dim added to the diagonal) when the matrix is numerically
// indefinite. Throws NumericError if the jittered attempt also fails.
Eigen::LLT<Mat> cholesky_with_jitter(const Mat& m, double jitter_scale = 1e-9);

}  // namespace rbal

#endif  // RBAL_MATH_HPP
