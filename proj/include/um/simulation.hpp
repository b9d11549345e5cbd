#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "um/config.hpp"
#include "um/uncertain_model.hpp"

namespace um {

enum class Execution { serial, parallel };

/**
 * Evidence phase of one run: the per-(agent, hypothesis) likelihood models
 * conditioned on freshly drawn prior evidence, together with the realized
 * evidence volumes and the asymptotic log likelihood ratio target each
 * model will converge to under the agent's observation distribution.
 * In the certain regime the models carry exact parameters and the target
 * and size matrices stay empty.
 */
struct EvidenceDraw {
  std::vector<std::vector<UncertainModel>> models;  // [agent][hypothesis]
  Eigen::MatrixXd evidence_sizes;                   // agents x hypotheses
  Eigen::MatrixXd target_log_ulr;                   // agents x hypotheses
};

EvidenceDraw draw_evidence(const ExperimentConfig& cfg, std::uint64_t run_seed);

struct RunResult {
  int run_index = 0;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> checkpoints;
  std::vector<Eigen::MatrixXd> log_beliefs;  // per checkpoint, agents x hypotheses
  std::vector<Eigen::MatrixXd> cum_log_ulr;  // per checkpoint, each agent's own sum
  Eigen::MatrixXd final_log_ulr;
  Eigen::MatrixXd target_log_ulr;            // empty in the certain regime
  Eigen::MatrixXd evidence_sizes;            // empty in the certain regime
  // populated only when cfg.record_observations
  std::vector<std::vector<int>> obs_categories;
  std::vector<std::vector<Eigen::VectorXd>> obs_points;
};

struct RunFailure {
  int run_index = 0;
  std::string reason;
};

struct EnsembleResult {
  std::vector<std::int64_t> checkpoints;
  std::vector<RunResult> runs;               // completed runs, ascending run_index
  std::vector<RunFailure> failures;          // aborted runs, never silently dropped
  std::vector<Eigen::MatrixXd> mean_log_beliefs;
  Eigen::MatrixXd mean_target_log_ulr;       // empty in the certain regime
  Eigen::VectorXd network_target_mean;       // per hypothesis
  Eigen::VectorXd slope_targets;             // per hypothesis, certain regime only
};

// Roughly `count` log-spaced integer checkpoints over [1, horizon],
// deduplicated, always ending at the horizon.
std::vector<std::int64_t> checkpoint_schedule(std::int64_t horizon, int count);

RunResult run_single(const ExperimentConfig& cfg, int run_index);

// Monte Carlo ensemble.  Runs are independent by construction (each gets
// its own seed split from the master), so the parallel path distributes
// them across OpenMP threads; results are stored by run index and the two
// paths produce identical output.  The serial path is the reference the
// parallel one is tested against.
EnsembleResult run_ensemble(const ExperimentConfig& cfg, Execution exec = Execution::parallel);

// Largest |sum_i log mu_i - sum_i sum_tau log ell_i| over checkpoints and
// hypotheses: the column sums of the belief matrix must match the total
// accumulated evidence exactly, up to floating-point drift.
double max_centralization_residual(const RunResult& run);

// Least-squares slope of each (agent, hypothesis) series against t over
// checkpoints in [t_lo, t_hi].  Needs at least two checkpoints inside.
Eigen::MatrixXd estimate_slope(const std::vector<std::int64_t>& checkpoints,
                               const std::vector<Eigen::MatrixXd>& series, std::int64_t t_lo,
                               std::int64_t t_hi);

// Certain-regime drift: per hypothesis, minus the network average of
// D(Q_i || P_i(theta)) - D(Q_i || P_i(theta*)) through each agent's family.
Eigen::VectorXd certain_slope_targets(const ExperimentConfig& cfg);

// Deterministic targets with the evidence replaced by its expected
// sufficient statistics at a common volume n: what the dashed convergence
// lines would be with idealized evidence, free of sampling noise.
Eigen::MatrixXd nominal_target_log_ulr(const ExperimentConfig& cfg, double n);

// Writes beliefs.csv, targets.json, summary.json, config.json into dir.
void write_outputs(const ExperimentConfig& cfg, const EnsembleResult& ens,
                   const std::string& dir);

}  // namespace um
