#include "um/network.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace um {

Network make_cycle_network(int m, double self_weight) {
  if (m < 2) {
    throw std::invalid_argument("make_cycle_network: need at least 2 agents");
  }
  if (self_weight <= 0.0 || self_weight >= 1.0) {
    throw std::invalid_argument("make_cycle_network: self weight must lie in (0,1)");
  }
  Network net{m, Eigen::MatrixXd::Zero(m, m)};
  for (int i = 0; i < m; ++i) {
    net.weights(i, i) = self_weight;
    net.weights(i, (i + 1) % m) = 1.0 - self_weight;
  }
  return net;
}

namespace {

// Reachability of every node from node 0 along edges selected by `edge`.
bool reaches_all(const Eigen::MatrixXd& w, bool transpose) {
  const int m = static_cast<int>(w.rows());
  std::vector<char> seen(m, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < m; ++v) {
      const double entry = transpose ? w(v, u) : w(u, v);
      if (entry > 0.0 && !seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == m;
}

}  // namespace

void validate_network(const Network& net, double tol) {
  if (net.m < 1 || net.weights.rows() != net.m || net.weights.cols() != net.m) {
    throw std::invalid_argument("network: weight matrix shape does not match m");
  }
  if (net.weights.minCoeff() < 0.0) {
    throw std::invalid_argument("network: negative weight");
  }
  for (int i = 0; i < net.m; ++i) {
    if (std::abs(net.weights.row(i).sum() - 1.0) > tol) {
      throw std::invalid_argument("network: row " + std::to_string(i) + " does not sum to 1");
    }
    if (std::abs(net.weights.col(i).sum() - 1.0) > tol) {
      throw std::invalid_argument("network: column " + std::to_string(i) + " does not sum to 1");
    }
    if (net.weights(i, i) <= 0.0) {
      throw std::invalid_argument("network: zero diagonal at agent " + std::to_string(i));
    }
  }
  if (!reaches_all(net.weights, false) || !reaches_all(net.weights, true)) {
    throw std::invalid_argument("network: graph of positive weights is not strongly connected");
  }
}

void BeliefLedger::step(const Network& net, const Eigen::MatrixXd& log_ell) {
  if (log_ell.rows() != log_mu.rows() || log_ell.cols() != log_mu.cols()) {
    throw std::invalid_argument("BeliefLedger::step: log ell shape mismatch");
  }
  log_mu = net.weights * log_mu + log_ell;
}

Eigen::VectorXd consensus_gap(const Eigen::MatrixXd& log_mu) {
  return (log_mu.colwise().maxCoeff() - log_mu.colwise().minCoeff()).transpose();
}

Eigen::VectorXd convergence_target(const Eigen::MatrixXd& per_agent_log_ulr_targets) {
  return per_agent_log_ulr_targets.colwise().mean().transpose();
}

double mixing_rate_bound(const Network& net) {
  double eta = 1.0;
  for (int i = 0; i < net.m; ++i) {
    for (int j = 0; j < net.m; ++j) {
      const double w = net.weights(i, j);
      if (w > 0.0 && w < eta) eta = w;
    }
  }
  return 1.0 - eta / (4.0 * net.m * net.m);
}

double mixing_gap_bound(const Network& net, int t) {
  return std::sqrt(2.0) * net.m * std::pow(mixing_rate_bound(net), t);
}

double mixing_gap(const Network& net, int t) {
  if (t < 0) {
    throw std::invalid_argument("mixing_gap: negative power");
  }
  Eigen::MatrixXd powered = Eigen::MatrixXd::Identity(net.m, net.m);
  for (int i = 0; i < t; ++i) powered = powered * net.weights;
  const Eigen::MatrixXd diff =
      powered - Eigen::MatrixXd::Constant(net.m, net.m, 1.0 / net.m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff);
  return svd.singularValues()[0];
}

void to_json(nlohmann::json& j, const Network& net) {
  nlohmann::json w = nlohmann::json::array();
  for (int i = 0; i < net.m; ++i) {
    for (int k = 0; k < net.m; ++k) w.push_back(net.weights(i, k));
  }
  j = {{"m", net.m}, {"weights", std::move(w)}};
}

void from_json(const nlohmann::json& j, Network& net) {
  net.m = j.at("m").get<int>();
  const auto& w = j.at("weights");
  if (!w.is_array() || static_cast<int>(w.size()) != net.m * net.m) {
    throw std::invalid_argument("network: weights must hold m*m entries in row-major order");
  }
  net.weights.resize(net.m, net.m);
  for (int i = 0; i < net.m; ++i) {
    for (int k = 0; k < net.m; ++k) {
      net.weights(i, k) = w[static_cast<std::size_t>(i * net.m + k)].get<double>();
    }
  }
  validate_network(net);
}

}  // namespace um
