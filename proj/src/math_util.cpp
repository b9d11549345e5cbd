#include "um/math_util.hpp"

#include <cmath>
#include <stdexcept>

namespace um {

namespace {
constexpr double kLogPi = 1.1447298858494001741434273513531;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw std::invalid_argument("log_gamma: argument must be positive");
  }
  return std::lgamma(x);
}

double log_multivariate_gamma(int d, double x) {
  if (d < 1) {
    throw std::invalid_argument("log_multivariate_gamma: dimension must be >= 1");
  }
  double acc = kLogPi * d * (d - 1) / 4.0;
  for (int i = 1; i <= d; ++i) {
    acc += log_gamma(x + (1.0 - i) / 2.0);
  }
  return acc;
}

double log_multi_beta(const Eigen::VectorXd& psi) {
  if (psi.size() == 0) {
    throw std::invalid_argument("log_multi_beta: empty vector");
  }
  double acc = 0.0;
  double total = 0.0;
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    acc += log_gamma(psi[k]);
    total += psi[k];
  }
  return acc - log_gamma(total);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

double gaussian_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov) {
  const Eigen::Index d = x.size();
  if (mean.size() != d || cov.rows() != d || cov.cols() != d) {
    throw std::invalid_argument("gaussian_logpdf: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("gaussian_logpdf: covariance not positive definite");
  }
  const Eigen::VectorXd delta = x - mean;
  const Eigen::VectorXd half = llt.matrixL().solve(delta);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (d * kLog2Pi + log_det + half.squaredNorm());
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw std::invalid_argument("symmetric_sqrt: eigendecomposition failed");
  }
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("symmetric_sqrt: matrix not positive definite");
  }
  return es.operatorSqrt();
}

double log_sum_exp(const Eigen::VectorXd& v) {
  if (v.size() == 0) {
    throw std::invalid_argument("log_sum_exp: empty vector");
  }
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) {
    return m;
  }
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace um
