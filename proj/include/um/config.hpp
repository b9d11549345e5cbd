#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "um/dirichlet.hpp"
#include "um/grid.hpp"
#include "um/ground_truth.hpp"
#include "um/network.hpp"
#include "um/niw.hpp"

#include <nlohmann/json_fwd.hpp>

namespace um {

enum class ModelFamily { multinomial, gaussian, grid };

// Conjugate prior hyperparameters.  The defaults are the vacuous states the
// asymptotics are stated for; configs may override them.
struct PriorConfig {
  double dirichlet_pseudocount = 1.0;
  double niw_kappa0 = 1.0;
  double niw_nu0_offset = 2.0;  // nu0 = d + offset
  double niw_scatter_scale = 1.0;

  DirichletParams make_dirichlet(int K) const;
  NiwParams make_niw(int d) const;
  bool is_vacuous() const;
};

struct AgentConfig {
  DistributionSpec observed;                // what the agent actually sees
  std::vector<DistributionSpec> evidence;   // prior-evidence source per hypothesis
  ModelFamily family = ModelFamily::gaussian;
};

// Half-open integer range for the evidence volume |r|, or the certain
// (infinite-evidence) regime.
struct EvidenceRange {
  bool certain = false;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct ExperimentConfig {
  std::string name;
  Network network;
  std::vector<std::string> hypotheses;
  int truth_index = 0;
  ModelFamily default_family = ModelFamily::gaussian;
  RectilinearGrid grid;                     // meaningful only for grid-family agents
  std::vector<AgentConfig> agents;
  EvidenceRange evidence_range;
  PriorConfig priors;
  std::int64_t horizon = 0;
  int checkpoint_count = 100;
  int runs = 10;
  std::uint64_t master_seed = 20240801ull;
  bool record_observations = false;

  int agent_count() const { return static_cast<int>(agents.size()); }
  int hypothesis_count() const { return static_cast<int>(hypotheses.size()); }
  bool any_gaussian() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Named built-in experiment setups.
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
ExperimentConfig make_preset(const std::string& name);

// Loads a preset by name or else parses the file at the given path.
ExperimentConfig load_config(const std::string& name_or_path);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct IdentifiabilityReport {
  Eigen::MatrixXd kl;                          // agents x hypotheses, data-level
  std::vector<std::vector<int>> argmin_sets;   // per-agent indistinguishable sets
  std::vector<int> intersection;
  Eigen::MatrixXd kl_model;                    // same, through the model family
  std::vector<std::vector<int>> argmin_sets_model;
  std::vector<int> intersection_model;
};

// KL tables behind the identifiability check.  Continuous pairs without a
// closed form are estimated by common-random-number Monte Carlo, so two
// hypotheses with identical specs tie exactly.
IdentifiabilityReport check_identifiability(const ExperimentConfig& cfg,
                                            std::int64_t mc_samples = 50000);

// Full structural validation: network requirements, spec shapes and
// family consistency, range and horizon sanity, identifiability.
std::vector<CheckResult> validate_experiment(const ExperimentConfig& cfg);

// Family projection of a distribution spec for one agent: the parameters a
// certain agent of that family would hold (category masses, moment-matched
// Gaussian, or grid cell masses).
DistributionSpec project_to_family(const ExperimentConfig& cfg, ModelFamily family,
                                   const DistributionSpec& spec);

}  // namespace um
