#pragma once

#include <Eigen/Dense>
#include <vector>

namespace um {

/**
 * Normal-inverse-Wishart hyperparameters (varpi, kappa, nu, S) for a
 * d-dimensional Gaussian with unknown mean and covariance.  The scale
 * matrix S is kept exactly symmetric: every update re-symmetrizes via
 * (S + S^T)/2 before the positive-definiteness check, since the rank-one
 * recursion otherwise lets asymmetry creep in over long streams.
 *
 * nu must stay > d + 1 so the predictive distribution has a defined
 * covariance; the vacuous prior uses nu = d + 2, the smallest integer
 * choice with that property.
 */
struct NiwParams {
  Eigen::VectorXd varpi;
  double kappa = 0.0;
  double nu = 0.0;
  Eigen::MatrixXd S;

  int dim() const { return static_cast<int>(varpi.size()); }
};

// Multivariate Student-t parameters of the posterior predictive.
struct StudentT {
  double dof = 0.0;
  Eigen::VectorXd center;
  Eigen::MatrixXd shape;
};

// Vacuous prior: varpi = 0, kappa = 1, nu = d + 2, S = I.
NiwParams vacuous_niw(int d);

// Throws NumericalDegeneracyError unless S is symmetric positive definite;
// the pivot floor is 1e-10 relative to the scale of S.
void check_spd(const Eigen::MatrixXd& S);

// One-step update with a single observation.
NiwParams niw_absorb_one(const NiwParams& p, const Eigen::VectorXd& x);

// Batch update with n observations given as (n, sum_i x_i, sum_i x_i x_i^T).
NiwParams niw_absorb_stats(const NiwParams& p, double n, const Eigen::VectorXd& sum,
                           const Eigen::MatrixXd& scatter);

NiwParams niw_absorb_batch(const NiwParams& p, const std::vector<Eigen::VectorXd>& xs);

// log of the NIW normalization constant.
double niw_log_normalizer(const NiwParams& p);

// log NIW density at mean m, covariance Sigma.
double niw_logpdf(const NiwParams& p, const Eigen::VectorXd& m, const Eigen::MatrixXd& Sigma);

// Posterior predictive: Student-t with dof nu - d + 1 centered at varpi with
// shape (kappa + 1) / (kappa (nu - d + 1)) * S.
StudentT posterior_predictive(const NiwParams& p);

double student_t_logpdf(const StudentT& t, const Eigen::VectorXd& x);

}  // namespace um
