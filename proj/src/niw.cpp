#include "um/niw.hpp"

#include <cmath>
#include <stdexcept>

#include "um/errors.hpp"
#include "um/math_util.hpp"

namespace um {

namespace {

constexpr double kLog2 = 0.69314718055994530941723212145818;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kLogPi = 1.1447298858494001741434273513531;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& S) {
  return 0.5 * (S + S.transpose());
}

}  // namespace

NiwParams vacuous_niw(int d) {
  if (d < 1) {
    throw std::invalid_argument("vacuous_niw: dimension must be >= 1");
  }
  return {Eigen::VectorXd::Zero(d), 1.0, static_cast<double>(d) + 2.0,
          Eigen::MatrixXd::Identity(d, d)};
}

void check_spd(const Eigen::MatrixXd& S) {
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    throw NumericalDegeneracyError("scale matrix lost positive definiteness");
  }
  const double min_pivot = llt.matrixL().toDenseMatrix().diagonal().minCoeff();
  const double scale = std::max(1.0, S.diagonal().maxCoeff());
  if (min_pivot * min_pivot <= 1e-10 * scale) {
    throw NumericalDegeneracyError("scale matrix nearly singular: smallest pivot below tolerance");
  }
}

NiwParams niw_absorb_one(const NiwParams& p, const Eigen::VectorXd& x) {
  if (x.size() != p.varpi.size()) {
    throw std::invalid_argument("niw_absorb_one: observation dimension mismatch");
  }
  NiwParams out;
  out.kappa = p.kappa + 1.0;
  out.nu = p.nu + 1.0;
  out.varpi = (p.kappa * p.varpi + x) / out.kappa;
  out.S = symmetrized(p.S + x * x.transpose() + p.kappa * p.varpi * p.varpi.transpose() -
                      out.kappa * out.varpi * out.varpi.transpose());
  check_spd(out.S);
  return out;
}

NiwParams niw_absorb_stats(const NiwParams& p, double n, const Eigen::VectorXd& sum,
                           const Eigen::MatrixXd& scatter) {
  if (n < 0.0) {
    throw std::invalid_argument("niw_absorb_stats: negative count");
  }
  if (n == 0.0) {
    return p;
  }
  if (sum.size() != p.varpi.size() || scatter.rows() != p.varpi.size() ||
      scatter.cols() != p.varpi.size()) {
    throw std::invalid_argument("niw_absorb_stats: statistic dimension mismatch");
  }
  NiwParams out;
  out.kappa = p.kappa + n;
  out.nu = p.nu + n;
  out.varpi = (p.kappa * p.varpi + sum) / out.kappa;
  out.S = symmetrized(p.S + scatter + p.kappa * p.varpi * p.varpi.transpose() -
                      out.kappa * out.varpi * out.varpi.transpose());
  check_spd(out.S);
  return out;
}

NiwParams niw_absorb_batch(const NiwParams& p, const std::vector<Eigen::VectorXd>& xs) {
  if (xs.empty()) {
    return p;
  }
  const Eigen::Index d = p.varpi.size();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : xs) {
    if (x.size() != d) {
      throw std::invalid_argument("niw_absorb_batch: observation dimension mismatch");
    }
    sum += x;
    scatter += x * x.transpose();
  }
  return niw_absorb_stats(p, static_cast<double>(xs.size()), sum, scatter);
}

double niw_log_normalizer(const NiwParams& p) {
  const int d = p.dim();
  check_spd(p.S);
  Eigen::LLT<Eigen::MatrixXd> llt(p.S);
  const double log_det_S = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * p.nu * d * kLog2 + log_multivariate_gamma(d, 0.5 * p.nu) +
         0.5 * d * (kLog2Pi - std::log(p.kappa)) - 0.5 * p.nu * log_det_S;
}

double niw_logpdf(const NiwParams& p, const Eigen::VectorXd& m, const Eigen::MatrixXd& Sigma) {
  const int d = p.dim();
  if (m.size() != d || Sigma.rows() != d || Sigma.cols() != d) {
    throw std::invalid_argument("niw_logpdf: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("niw_logpdf: covariance not positive definite");
  }
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const Eigen::VectorXd delta = m - p.varpi;
  const double maha = delta.dot(llt.solve(delta));
  const double tr = llt.solve(p.S).trace();
  return -niw_log_normalizer(p) - 0.5 * (p.nu + d + 2.0) * log_det - 0.5 * tr -
         0.5 * p.kappa * maha;
}

StudentT posterior_predictive(const NiwParams& p) {
  const int d = p.dim();
  const double dof = p.nu - d + 1.0;
  if (dof <= 0.0) {
    throw std::invalid_argument("posterior_predictive: nu too small for a predictive");
  }
  return {dof, p.varpi, (p.kappa + 1.0) / (p.kappa * dof) * p.S};
}

double student_t_logpdf(const StudentT& t, const Eigen::VectorXd& x) {
  const Eigen::Index d = t.center.size();
  if (x.size() != d) {
    throw std::invalid_argument("student_t_logpdf: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(t.shape);
  if (llt.info() != Eigen::Success) {
    throw NumericalDegeneracyError("student_t_logpdf: shape matrix not positive definite");
  }
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const Eigen::VectorXd delta = x - t.center;
  const double maha = delta.dot(llt.solve(delta));
  return log_gamma(0.5 * (t.dof + d)) - log_gamma(0.5 * t.dof) -
         0.5 * d * (std::log(t.dof) + kLogPi) - 0.5 * log_det -
         0.5 * (t.dof + d) * std::log1p(maha / t.dof);
}

}  // namespace um
