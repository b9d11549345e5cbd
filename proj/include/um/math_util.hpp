#pragma once

#include <Eigen/Dense>

namespace um {

// Natural log of the gamma function.  Thin wrapper so every module pulls
// log-gamma from one place; libm's lgamma meets the accuracy we need
// (|error| well under 1e-12 over the argument ranges that occur here).
double log_gamma(double x);

// log Gamma_d(x), the multivariate gamma function.
double log_multivariate_gamma(int d, double x);

// log B(psi) = sum_k lgamma(psi_k) - lgamma(sum_k psi_k), the multivariate
// beta function.  All entries must be positive.
double log_multi_beta(const Eigen::VectorXd& psi);

// Standard normal CDF.
double normal_cdf(double x);

// log of N(x; mean, cov).  cov must be symmetric positive definite.
double gaussian_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov);

// Symmetric positive-definite square root of a symmetric matrix.
// Throws if any eigenvalue is non-positive.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m);

// log(sum_i exp(v_i)) without overflow.
double log_sum_exp(const Eigen::VectorXd& v);

}  // namespace um
