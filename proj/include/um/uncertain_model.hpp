#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "um/dirichlet.hpp"
#include "um/ground_truth.hpp"
#include "um/niw.hpp"

#include <nlohmann/json_fwd.hpp>

namespace um {

enum class Family { multinomial, gaussian };

// Parameters of a single likelihood model: a category distribution or a
// Gaussian.  Used for the certain (infinite-evidence) regime and for the
// asymptotic evaluation point.
using LikelihoodParams = std::variant<MultinomialSpec, GaussianSpec>;

/**
 * One agent's likelihood state for one hypothesis.
 *
 * Finite evidence: holds two hyperparameter states over the same family,
 * one conditioned on {evidence, observations} and one on observations
 * alone.  Each update returns the log uncertain likelihood update, the log
 * ratio of the two posterior predictive densities at the new observation,
 * and folds the observation into both states.  The running sum of these
 * returns is the log uncertain likelihood ratio.
 *
 * Certain regime (the infinite-evidence limit): the numerator becomes the
 * exact likelihood at fixed parameters and only the ignorance state keeps
 * updating.
 */
class UncertainModel {
 public:
  // The default factories start from the vacuous priors; the overloads
  // taking an explicit prior exist for configurations that override them.
  static UncertainModel multinomial(const Eigen::VectorXd& evidence_counts);
  static UncertainModel multinomial(const Eigen::VectorXd& evidence_counts,
                                    const DirichletParams& prior);
  static UncertainModel gaussian(int d, const std::vector<Eigen::VectorXd>& evidence);
  static UncertainModel gaussian(const NiwParams& prior,
                                 const std::vector<Eigen::VectorXd>& evidence);
  static UncertainModel gaussian_from_stats(int d, std::int64_t n, const Eigen::VectorXd& sum,
                                            const Eigen::MatrixXd& scatter);
  static UncertainModel gaussian_from_stats(const NiwParams& prior, std::int64_t n,
                                            const Eigen::VectorXd& sum,
                                            const Eigen::MatrixXd& scatter);
  static UncertainModel certain(const LikelihoodParams& params);
  static UncertainModel certain(const LikelihoodParams& params,
                                const DirichletParams& ignorance_prior);
  static UncertainModel certain(const LikelihoodParams& params,
                                const NiwParams& ignorance_prior);

  Family family() const { return family_; }
  bool is_certain() const { return certain_.has_value(); }
  // Number of evidence observations; callers must branch on is_certain()
  // first since the certain regime has no finite count.
  std::int64_t evidence_count() const;
  double log_ulr() const { return log_ulr_; }

  // Observation updates; the categorical overload is for the multinomial
  // family, the vector one for the Gaussian family.  Both return log ell.
  double update(int k);
  double update(const Eigen::VectorXd& x);

  const DirichletParams& theta_dirichlet() const;
  const DirichletParams& ignorance_dirichlet() const;
  const NiwParams& theta_niw() const;
  const NiwParams& ignorance_niw() const;
  const LikelihoodParams& certain_params() const;

  friend void to_json(nlohmann::json& j, const UncertainModel& m);
  friend void from_json(const nlohmann::json& j, UncertainModel& m);

 private:
  UncertainModel() = default;

  Family family_ = Family::multinomial;
  std::int64_t evidence_count_ = 0;
  double log_ulr_ = 0.0;
  std::optional<LikelihoodParams> certain_;
  // multinomial state
  DirichletParams theta_dir_, ignorance_dir_;
  // gaussian state
  NiwParams theta_niw_, ignorance_niw_;
};

// Log uncertain likelihood ratio of a full observation sequence, computed
// in one shot from normalization constants rather than by recursion.
// These are the oracle forms the recursive path is tested against.
double batch_log_ulr(const Eigen::VectorXd& evidence_counts, const Eigen::VectorXd& obs_counts);
double batch_log_ulr(const DirichletParams& prior, const Eigen::VectorXd& evidence_counts,
                     const Eigen::VectorXd& obs_counts);
double batch_log_ulr(int d, const std::vector<Eigen::VectorXd>& evidence,
                     const std::vector<Eigen::VectorXd>& observations);
double batch_log_ulr(const NiwParams& prior, const std::vector<Eigen::VectorXd>& evidence,
                     const std::vector<Eigen::VectorXd>& observations);

// Almost-sure limit of the uncertain likelihood ratio: the posterior
// density of the evidence-conditioned state at the truth parameters over
// the prior density there.  The multinomial overload takes the evidence
// counts directly; the Gaussian overload takes the evidence-conditioned
// state psi(r).  The two-argument forms assume the vacuous prior.
double asymptotic_log_ulr(const Eigen::VectorXd& evidence_counts, const Eigen::VectorXd& pi_star);
double asymptotic_log_ulr(const Eigen::VectorXd& evidence_counts, const Eigen::VectorXd& pi_star,
                          const DirichletParams& prior);
double asymptotic_log_ulr(const NiwParams& evidence_state, const GaussianSpec& phi_star);
double asymptotic_log_ulr(const NiwParams& evidence_state, const GaussianSpec& phi_star,
                          const NiwParams& prior);

}  // namespace um
