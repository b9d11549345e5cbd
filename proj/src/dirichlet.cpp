#include "um/dirichlet.hpp"

#include <cmath>
#include <stdexcept>

#include "um/math_util.hpp"

namespace um {

DirichletParams vacuous_dirichlet(int K) {
  if (K < 2) {
    throw std::invalid_argument("vacuous_dirichlet: need at least 2 outcomes");
  }
  return {Eigen::VectorXd::Ones(K)};
}

DirichletParams dirichlet_absorb(const DirichletParams& prior, const Eigen::VectorXd& counts) {
  if (counts.size() != prior.psi.size()) {
    throw std::invalid_argument("dirichlet_absorb: count vector length mismatch");
  }
  if (counts.minCoeff() < 0.0) {
    throw std::invalid_argument("dirichlet_absorb: negative count");
  }
  return {prior.psi + counts};
}

double dirichlet_predictive_log(const DirichletParams& p, int k) {
  if (k < 0 || k >= p.psi.size()) {
    throw std::invalid_argument("dirichlet_predictive_log: outcome out of range");
  }
  return std::log(p.psi[k]) - std::log(p.psi.sum());
}

double dirichlet_logpdf(const DirichletParams& p, const Eigen::VectorXd& pi) {
  if (pi.size() != p.psi.size()) {
    throw std::invalid_argument("dirichlet_logpdf: dimension mismatch");
  }
  if (pi.minCoeff() <= 0.0) {
    throw std::invalid_argument("dirichlet_logpdf: point must lie in the open simplex");
  }
  if (std::abs(pi.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("dirichlet_logpdf: point must sum to 1");
  }
  double acc = -log_multi_beta(p.psi);
  for (Eigen::Index k = 0; k < pi.size(); ++k) {
    acc += (p.psi[k] - 1.0) * std::log(pi[k]);
  }
  return acc;
}

}  // namespace um
