#pragma once

#include <Eigen/Dense>

#include <nlohmann/json_fwd.hpp>

namespace um {

/**
 * Weighted communication graph.  weights(i, j) is the weight agent i puts
 * on agent j's belief; a belief exchange is valid when the matrix is
 * doubly stochastic with positive diagonal and the graph of positive
 * entries is strongly connected.
 */
struct Network {
  int m = 0;
  Eigen::MatrixXd weights;
};

// Directed cycle with self-loops: each agent keeps self_weight for itself
// and passes 1 - self_weight to its successor.
Network make_cycle_network(int m, double self_weight);

// Throws std::invalid_argument on any violated requirement; row and column
// sums are checked to within tol.
void validate_network(const Network& net, double tol = 1e-12);

/**
 * Unnormalized log beliefs, one row per agent, one column per hypothesis.
 * All-zero initialization encodes the uniform unit prior.  Beliefs stay
 * in log space for the whole run; nothing ever normalizes them, so the
 * column sums track the sum of all agents' accumulated log likelihood
 * updates exactly.
 */
struct BeliefLedger {
  Eigen::MatrixXd log_mu;

  BeliefLedger(int m, int hypotheses) : log_mu(Eigen::MatrixXd::Zero(m, hypotheses)) {}

  // log mu <- A log mu + log ell.
  void step(const Network& net, const Eigen::MatrixXd& log_ell);
};

// Per-hypothesis max-min spread of log beliefs across agents.
Eigen::VectorXd consensus_gap(const Eigen::MatrixXd& log_mu);

// Per-hypothesis network limit: the column mean of the per-agent
// asymptotic log likelihood ratios (geometric mean in linear space).
Eigen::VectorXd convergence_target(const Eigen::MatrixXd& per_agent_log_ulr_targets);

// Contraction rate bound 1 - eta / (4 m^2), eta the smallest positive entry.
double mixing_rate_bound(const Network& net);

// Upper bound sqrt(2) m lambda^t on ||A^t - (1/m) 1 1^T||_2.
double mixing_gap_bound(const Network& net, int t);

// Exact ||A^t - (1/m) 1 1^T||_2 (spectral norm).
double mixing_gap(const Network& net, int t);

void to_json(nlohmann::json& j, const Network& net);
void from_json(const nlohmann::json& j, Network& net);

}  // namespace um
