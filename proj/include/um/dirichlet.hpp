#pragma once

#include <Eigen/Dense>

namespace um {

/**
 * Dirichlet hyperparameters over a K-outcome multinomial.  The vacuous
 * prior is the all-ones vector (complete ignorance); conditioning on a
 * count vector adds it elementwise, so psi stays positive throughout.
 * Counts are doubles: simulated evidence is integral, but expected-count
 * evidence (used for deterministic targets) is not.
 */
struct DirichletParams {
  Eigen::VectorXd psi;
};

// Complete-ignorance prior over K outcomes.
DirichletParams vacuous_dirichlet(int K);

// psi + counts; counts must be nonnegative and of matching length.
DirichletParams dirichlet_absorb(const DirichletParams& prior, const Eigen::VectorXd& counts);

// log predictive probability of outcome k under the Dirichlet-multinomial
// posterior predictive, log(psi_k / sum(psi)).
double dirichlet_predictive_log(const DirichletParams& p, int k);

// log density at a point pi of the open simplex.
double dirichlet_logpdf(const DirichletParams& p, const Eigen::VectorXd& pi);

}  // namespace um
