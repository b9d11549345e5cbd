#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

#include "um/rng.hpp"

#include <nlohmann/json_fwd.hpp>

namespace um {

struct GaussianSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // symmetric positive definite
};

struct MixtureComponent {
  double weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Finite Gaussian mixture.  Weights must be positive and sum to 1.
struct MixtureSpec {
  std::vector<MixtureComponent> components;
};

// Categorical distribution over K outcomes; pi on the open simplex is not
// required (zero entries are legal for a data generator).
struct MultinomialSpec {
  Eigen::VectorXd pi;
};

using DistributionSpec = std::variant<GaussianSpec, MixtureSpec, MultinomialSpec>;

int dimension_of(const DistributionSpec& spec);

// Validates shape and positivity constraints; throws std::invalid_argument.
void validate_spec(const DistributionSpec& spec);

/**
 * Draws from a DistributionSpec.  Square roots of covariances are taken
 * once at construction.  A Gaussian draw consumes d normals; a mixture
 * draw consumes one uniform (component choice by inverse CDF) followed by
 * d normals, in that order, so streams stay aligned across code changes.
 */
class Sampler {
 public:
  explicit Sampler(const DistributionSpec& spec);

  bool is_categorical() const;
  Eigen::VectorXd sample_point(RngStream& rng) const;
  int sample_category(RngStream& rng) const;

 private:
  struct Comp {
    double cum_weight;
    Eigen::VectorXd mean;
    Eigen::MatrixXd sqrt_cov;
  };
  std::vector<Comp> comps_;       // empty for categorical specs
  Eigen::VectorXd pi_cum_;        // empty for continuous specs
  bool mixture_ = false;          // mixtures spend the component uniform even with one component
  int dim_ = 0;
};

// Log density (continuous specs) evaluated at x.
double spec_logpdf(const DistributionSpec& spec, const Eigen::VectorXd& x);

// Log mass (categorical specs) of outcome k.
double spec_logpmf(const MultinomialSpec& spec, int k);

// Mean and covariance of a spec; for mixtures this is the moment-matched
// Gaussian fit (the KL-minimizing Gaussian approximation).
GaussianSpec moment_match_gaussian(const DistributionSpec& spec);

// D_KL(p || q) between Gaussians, closed form.
double kl_gaussian(const GaussianSpec& p, const GaussianSpec& q);

// D_KL(p || q) between categorical distributions.  Entries of p with zero
// mass contribute nothing; a positive-p, zero-q entry yields +inf.
double kl_multinomial(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

struct KlEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::int64_t samples = 0;
};

// Monte Carlo estimate of D_KL(p || q) for continuous specs, sampling from
// p.  Deterministic given the seed.
KlEstimate kl_monte_carlo(const DistributionSpec& p, const DistributionSpec& q,
                          std::int64_t n, std::uint64_t seed);

// D_KL(p || q) by the cheapest exact route available, falling back to
// kl_monte_carlo (seeded as given) when no closed form applies.
KlEstimate kl_between(const DistributionSpec& p, const DistributionSpec& q,
                      std::int64_t mc_samples, std::uint64_t seed);

void to_json(nlohmann::json& j, const DistributionSpec& spec);
void from_json(const nlohmann::json& j, DistributionSpec& spec);

}  // namespace um
