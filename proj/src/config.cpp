#include "um/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "um/math_util.hpp"
#include "um/rng.hpp"

namespace um {

namespace {

constexpr std::int64_t kDefaultHorizonDiscrete = 100000;
constexpr std::int64_t kDefaultHorizonGaussian = 10000;

std::string family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::multinomial: return "multinomial";
    case ModelFamily::gaussian: return "gaussian";
    case ModelFamily::grid: return "grid";
  }
  return "?";
}

ModelFamily family_from_name(const std::string& s) {
  if (s == "multinomial") return ModelFamily::multinomial;
  if (s == "gaussian") return ModelFamily::gaussian;
  if (s == "grid") return ModelFamily::grid;
  throw std::invalid_argument("config: unknown model family '" + s + "'");
}

}  // namespace

DirichletParams PriorConfig::make_dirichlet(int K) const {
  if (dirichlet_pseudocount <= 0.0) {
    throw std::invalid_argument("priors: dirichlet_pseudocount must be positive");
  }
  return {dirichlet_pseudocount * Eigen::VectorXd::Ones(K)};
}

NiwParams PriorConfig::make_niw(int d) const {
  if (niw_kappa0 <= 0.0 || niw_scatter_scale <= 0.0 || d + niw_nu0_offset <= d + 1) {
    throw std::invalid_argument("priors: NIW hyperparameters out of range");
  }
  return {Eigen::VectorXd::Zero(d), niw_kappa0, d + niw_nu0_offset,
          niw_scatter_scale * Eigen::MatrixXd::Identity(d, d)};
}

bool PriorConfig::is_vacuous() const {
  return dirichlet_pseudocount == 1.0 && niw_kappa0 == 1.0 && niw_nu0_offset == 2.0 &&
         niw_scatter_scale == 1.0;
}

bool ExperimentConfig::any_gaussian() const {
  return std::any_of(agents.begin(), agents.end(),
                     [](const AgentConfig& a) { return a.family == ModelFamily::gaussian; });
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.name = j.value("name", std::string("unnamed"));

  const auto& net = j.at("network");
  if (net.contains("cycle")) {
    const auto& c = net.at("cycle");
    cfg.network = make_cycle_network(c.at("m").get<int>(), c.at("self_weight").get<double>());
  } else {
    from_json(net, cfg.network);
  }

  cfg.hypotheses = j.at("hypotheses").get<std::vector<std::string>>();
  cfg.truth_index = j.at("truth_index").get<int>();

  const auto parse_model = [&cfg](const nlohmann::json& m) -> ModelFamily {
    const ModelFamily f = family_from_name(m.at("family").get<std::string>());
    if (f == ModelFamily::grid) {
      if (m.contains("hyperplanes")) {
        from_json(m, cfg.grid);
      } else {
        const std::vector<double> lo = m.at("lo").get<std::vector<double>>();
        const std::vector<double> hi = m.at("hi").get<std::vector<double>>();
        if (lo.size() != hi.size()) {
          throw std::invalid_argument("config: grid lo/hi length mismatch");
        }
        const auto dims = static_cast<Eigen::Index>(lo.size());
        cfg.grid = make_uniform_grid(static_cast<int>(dims), m.at("g").get<int>(),
                                     Eigen::Map<const Eigen::VectorXd>(lo.data(), dims),
                                     Eigen::Map<const Eigen::VectorXd>(hi.data(), dims));
      }
    }
    return f;
  };
  cfg.default_family = parse_model(j.at("model"));

  for (const auto& a : j.at("agents")) {
    AgentConfig agent;
    from_json(a.at("observed"), agent.observed);
    for (const auto& e : a.at("evidence")) {
      DistributionSpec spec;
      from_json(e, spec);
      agent.evidence.push_back(std::move(spec));
    }
    agent.family = a.contains("model") ? parse_model(a.at("model")) : cfg.default_family;
    cfg.agents.push_back(std::move(agent));
  }

  const auto& range = j.at("evidence_range");
  if (range.is_string()) {
    if (range.get<std::string>() != "certain") {
      throw std::invalid_argument("config: evidence_range must be a range or \"certain\"");
    }
    cfg.evidence_range.certain = true;
  } else {
    cfg.evidence_range.lo = range.at("lo").get<std::int64_t>();
    cfg.evidence_range.hi = range.at("hi").get<std::int64_t>();
  }

  if (j.contains("priors")) {
    const auto& p = j.at("priors");
    cfg.priors.dirichlet_pseudocount = p.value("dirichlet_pseudocount", 1.0);
    cfg.priors.niw_kappa0 = p.value("niw_kappa0", 1.0);
    cfg.priors.niw_nu0_offset = p.value("niw_nu0_offset", 2.0);
    cfg.priors.niw_scatter_scale = p.value("niw_scatter_scale", 1.0);
    cfg.priors.make_dirichlet(2);  // reject nonsense values early
    cfg.priors.make_niw(1);
  }

  cfg.horizon = j.value("horizon", std::int64_t{0});
  if (cfg.horizon == 0) {
    cfg.horizon = cfg.any_gaussian() ? kDefaultHorizonGaussian : kDefaultHorizonDiscrete;
  }
  cfg.checkpoint_count = j.value("checkpoints", 100);
  cfg.runs = j.value("runs", 10);
  cfg.master_seed = j.value("master_seed", std::uint64_t{20240801});
  cfg.record_observations = j.value("record_observations", false);
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  to_json(j["network"], cfg.network);
  j["hypotheses"] = cfg.hypotheses;
  j["truth_index"] = cfg.truth_index;

  const auto model_json = [&cfg](ModelFamily f) {
    nlohmann::json m{{"family", family_name(f)}};
    if (f == ModelFamily::grid) {
      nlohmann::json g;
      to_json(g, cfg.grid);
      m["hyperplanes"] = g.at("hyperplanes");
      m["dims"] = g.at("dims");
    }
    return m;
  };
  j["model"] = model_json(cfg.default_family);

  j["agents"] = nlohmann::json::array();
  for (const auto& a : cfg.agents) {
    nlohmann::json agent;
    to_json(agent["observed"], a.observed);
    agent["evidence"] = nlohmann::json::array();
    for (const auto& e : a.evidence) {
      nlohmann::json spec;
      to_json(spec, e);
      agent["evidence"].push_back(std::move(spec));
    }
    if (a.family != cfg.default_family) {
      agent["model"] = model_json(a.family);
    }
    j["agents"].push_back(std::move(agent));
  }

  if (cfg.evidence_range.certain) {
    j["evidence_range"] = "certain";
  } else {
    j["evidence_range"] = {{"lo", cfg.evidence_range.lo}, {"hi", cfg.evidence_range.hi}};
  }
  if (!cfg.priors.is_vacuous()) {
    j["priors"] = {{"dirichlet_pseudocount", cfg.priors.dirichlet_pseudocount},
                   {"niw_kappa0", cfg.priors.niw_kappa0},
                   {"niw_nu0_offset", cfg.priors.niw_nu0_offset},
                   {"niw_scatter_scale", cfg.priors.niw_scatter_scale}};
  }
  j["horizon"] = cfg.horizon;
  j["checkpoints"] = cfg.checkpoint_count;
  j["runs"] = cfg.runs;
  j["master_seed"] = cfg.master_seed;
  j["record_observations"] = cfg.record_observations;
  return j;
}

namespace {

GaussianSpec isotropic(double variance) {
  return {Eigen::Vector2d::Zero(), variance * Eigen::Matrix2d::Identity()};
}

MixtureSpec quad_mixture(double offset, double variance) {
  MixtureSpec mix;
  for (const double sx : {-1.0, 1.0}) {
    for (const double sy : {-1.0, 1.0}) {
      mix.components.push_back(
          {0.25, Eigen::Vector2d(sx * offset, sy * offset), variance * Eigen::Matrix2d::Identity()});
    }
  }
  return mix;
}

// Hypothesis assignment pattern: theta1 is the common distribution
// everywhere, theta2 deviates only at agent 2, theta3 only at agent 3.
std::vector<AgentConfig> two_deviators(const DistributionSpec& q1, const DistributionSpec& q2,
                                       const DistributionSpec& q3, ModelFamily family) {
  std::vector<AgentConfig> agents(4);
  for (int i = 0; i < 4; ++i) {
    agents[i].observed = q1;
    agents[i].family = family;
    agents[i].evidence = {q1, i == 1 ? q2 : q1, i == 2 ? q3 : q1};
  }
  return agents;
}

ExperimentConfig base_preset(const std::string& name, ModelFamily family) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.network = make_cycle_network(4, 0.5);
  cfg.hypotheses = {"theta1", "theta2", "theta3"};
  cfg.truth_index = 0;
  cfg.default_family = family;
  cfg.evidence_range = {false, 1000, 10000};
  cfg.runs = 10;
  cfg.master_seed = 20240801ull;
  return cfg;
}

ExperimentConfig preset_table1_gaussian(bool certain) {
  ExperimentConfig cfg = base_preset(certain ? "table1-gaussian-certain" : "table1-gaussian",
                                     ModelFamily::gaussian);
  cfg.agents = two_deviators(isotropic(1.0), isotropic(1.1), isotropic(1.5),
                             ModelFamily::gaussian);
  if (certain) cfg.evidence_range = {true, 0, 0};
  cfg.horizon = kDefaultHorizonGaussian;
  return cfg;
}

ExperimentConfig preset_mixture_gaussian() {
  ExperimentConfig cfg = base_preset("mixture-gaussian", ModelFamily::gaussian);
  cfg.agents = two_deviators(quad_mixture(1.5, 0.12), quad_mixture(1.0, 1.37),
                             quad_mixture(1.5, 0.25), ModelFamily::gaussian);
  cfg.horizon = kDefaultHorizonGaussian;
  return cfg;
}

ExperimentConfig preset_mixture_grid(int g) {
  ExperimentConfig cfg = base_preset("mixture-grid-g" + std::to_string(g), ModelFamily::grid);
  cfg.grid = make_uniform_grid(2, g, Eigen::Vector2d(-3.0, -3.0), Eigen::Vector2d(3.0, 3.0));
  cfg.agents = two_deviators(quad_mixture(1.5, 0.12), quad_mixture(1.0, 1.37),
                             quad_mixture(1.5, 0.25), ModelFamily::grid);
  cfg.horizon = kDefaultHorizonDiscrete;
  return cfg;
}

// Category distributions sit close together on purpose: the uncertain
// likelihood ratio reaches its limit at rate |r|^2/t when evidence and
// truth disagree, so wide separations would not settle within the default
// horizon for the larger evidence ranges.
ExperimentConfig preset_multinomial_k4() {
  ExperimentConfig cfg = base_preset("multinomial-k4", ModelFamily::multinomial);
  const MultinomialSpec p1{Eigen::Vector4d(0.25, 0.25, 0.25, 0.25)};
  const MultinomialSpec p2{Eigen::Vector4d(0.255, 0.245, 0.255, 0.245)};
  const MultinomialSpec p3{Eigen::Vector4d(0.255, 0.245, 0.245, 0.255)};
  cfg.agents = two_deviators(p1, p2, p3, ModelFamily::multinomial);
  cfg.horizon = kDefaultHorizonDiscrete;
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"table1-gaussian",  "table1-gaussian-certain", "mixture-gaussian", "mixture-grid-g2",
          "mixture-grid-g4",  "mixture-grid-g8",         "mixture-grid-g16", "multinomial-k4"};
}

bool is_preset(const std::string& name) {
  const auto names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ExperimentConfig make_preset(const std::string& name) {
  if (name == "table1-gaussian") return preset_table1_gaussian(false);
  if (name == "table1-gaussian-certain") return preset_table1_gaussian(true);
  if (name == "mixture-gaussian") return preset_mixture_gaussian();
  if (name == "mixture-grid-g2") return preset_mixture_grid(2);
  if (name == "mixture-grid-g4") return preset_mixture_grid(4);
  if (name == "mixture-grid-g8") return preset_mixture_grid(8);
  if (name == "mixture-grid-g16") return preset_mixture_grid(16);
  if (name == "multinomial-k4") return preset_multinomial_k4();
  throw std::invalid_argument("unknown preset '" + name + "'");
}

ExperimentConfig load_config(const std::string& name_or_path) {
  if (is_preset(name_or_path)) {
    return make_preset(name_or_path);
  }
  std::ifstream in(name_or_path);
  if (!in) {
    throw std::invalid_argument("cannot open config file '" + name_or_path + "'");
  }
  const nlohmann::json j = nlohmann::json::parse(in);  // throws with byte position
  return config_from_json(j);
}

DistributionSpec project_to_family(const ExperimentConfig& cfg, ModelFamily family,
                                   const DistributionSpec& spec) {
  switch (family) {
    case ModelFamily::multinomial: {
      const auto* m = std::get_if<MultinomialSpec>(&spec);
      if (m == nullptr) {
        throw std::invalid_argument(
            "multinomial-family agents need categorical distribution specs");
      }
      return *m;
    }
    case ModelFamily::gaussian:
      return moment_match_gaussian(spec);
    case ModelFamily::grid:
      return MultinomialSpec{cell_probabilities(cfg.grid, spec)};
  }
  throw std::logic_error("project_to_family: bad family");
}

namespace {

// One agent's KL row against every hypothesis.  Discrete cases are exact;
// continuous ones reuse a single sample set from the observed spec so that
// identical hypothesis specs produce identical estimates.
void kl_row(const ExperimentConfig& cfg, int agent, bool through_family,
            std::int64_t mc_samples, Eigen::VectorXd& kl_out, Eigen::MatrixXd& log_q_out,
            bool& is_mc) {
  const AgentConfig& a = cfg.agents[agent];
  const int H = cfg.hypothesis_count();
  kl_out.resize(H);
  is_mc = false;

  const bool discrete_model =
      through_family &&
      (a.family == ModelFamily::multinomial || a.family == ModelFamily::grid);
  const bool discrete_data = std::holds_alternative<MultinomialSpec>(a.observed);

  if (discrete_model || discrete_data) {
    const Eigen::VectorXd p =
        discrete_model
            ? std::get<MultinomialSpec>(project_to_family(cfg, a.family, a.observed)).pi
            : std::get<MultinomialSpec>(a.observed).pi;
    for (int h = 0; h < H; ++h) {
      const Eigen::VectorXd q =
          discrete_model
              ? std::get<MultinomialSpec>(project_to_family(cfg, a.family, a.evidence[h])).pi
              : std::get<MultinomialSpec>(a.evidence[h]).pi;
      kl_out[h] = kl_multinomial(p, q);
    }
    return;
  }

  // Continuous data.  Through the Gaussian family the hypothesis models are
  // moment-matched fits; at the data level they are the specs themselves.
  std::vector<DistributionSpec> targets;
  targets.reserve(H);
  for (int h = 0; h < H; ++h) {
    targets.push_back(through_family ? project_to_family(cfg, ModelFamily::gaussian, a.evidence[h])
                                     : a.evidence[h]);
  }

  const auto* pg = std::get_if<GaussianSpec>(&a.observed);
  bool all_closed = pg != nullptr;
  if (all_closed) {
    for (const auto& t : targets) {
      if (!std::holds_alternative<GaussianSpec>(t)) all_closed = false;
    }
  }
  if (all_closed) {
    for (int h = 0; h < H; ++h) {
      kl_out[h] = kl_gaussian(*pg, std::get<GaussianSpec>(targets[h]));
    }
    return;
  }

  is_mc = true;
  Sampler sampler(a.observed);
  RngStream rng(split_seed(0x1DE47F14B1ull, static_cast<std::uint64_t>(agent)));
  log_q_out.resize(mc_samples, H + 1);
  for (std::int64_t i = 0; i < mc_samples; ++i) {
    const Eigen::VectorXd x = sampler.sample_point(rng);
    log_q_out(i, H) = spec_logpdf(a.observed, x);
    for (int h = 0; h < H; ++h) {
      log_q_out(i, h) = spec_logpdf(targets[h], x);
    }
  }
  for (int h = 0; h < H; ++h) {
    kl_out[h] = (log_q_out.col(H) - log_q_out.col(h)).mean();
  }
}

std::vector<int> argmin_set(const Eigen::VectorXd& kl, const Eigen::MatrixXd& log_q, bool is_mc) {
  const int H = static_cast<int>(kl.size());
  const double kl_min = kl.minCoeff();
  std::vector<int> set;
  for (int h = 0; h < H; ++h) {
    double tol = 1e-9;
    if (is_mc) {
      // Paired difference against the current minimizer.
      int h_min = 0;
      for (int k = 0; k < H; ++k) {
        if (kl[k] == kl_min) h_min = k;
      }
      const Eigen::VectorXd diff = log_q.col(h_min) - log_q.col(h);
      const double n = static_cast<double>(diff.size());
      const double mean = diff.mean();
      const double var = (diff.array() - mean).square().sum() / (n - 1.0);
      tol = std::max(tol, 3.0 * std::sqrt(var / n));
    }
    if (kl[h] <= kl_min + tol) set.push_back(h);
  }
  return set;
}

}  // namespace

IdentifiabilityReport check_identifiability(const ExperimentConfig& cfg,
                                            std::int64_t mc_samples) {
  const int m = cfg.agent_count();
  const int H = cfg.hypothesis_count();
  IdentifiabilityReport rep;
  rep.kl.resize(m, H);
  rep.kl_model.resize(m, H);

  std::set<int> inter, inter_model;
  for (int h = 0; h < H; ++h) {
    inter.insert(h);
    inter_model.insert(h);
  }

  for (int i = 0; i < m; ++i) {
    for (const bool through_family : {false, true}) {
      Eigen::VectorXd kl;
      Eigen::MatrixXd log_q;
      bool is_mc = false;
      kl_row(cfg, i, through_family, mc_samples, kl, log_q, is_mc);
      const std::vector<int> amin = argmin_set(kl, log_q, is_mc);
      std::set<int> keep(amin.begin(), amin.end());
      auto& inter_ref = through_family ? inter_model : inter;
      for (auto it = inter_ref.begin(); it != inter_ref.end();) {
        it = keep.count(*it) ? std::next(it) : inter_ref.erase(it);
      }
      if (through_family) {
        rep.kl_model.row(i) = kl.transpose();
        rep.argmin_sets_model.push_back(amin);
      } else {
        rep.kl.row(i) = kl.transpose();
        rep.argmin_sets.push_back(amin);
      }
    }
  }
  rep.intersection.assign(inter.begin(), inter.end());
  rep.intersection_model.assign(inter_model.begin(), inter_model.end());
  return rep;
}

namespace {

std::string set_to_string(const std::vector<int>& s, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << (i ? "," : "") << names[s[i]];
  }
  os << "}";
  return os.str();
}

}  // namespace

std::vector<CheckResult> validate_experiment(const ExperimentConfig& cfg) {
  std::vector<CheckResult> checks;
  const auto add = [&checks](const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({name, pass, detail});
  };

  try {
    validate_network(cfg.network);
    add("network-doubly-stochastic-connected", true,
        "m=" + std::to_string(cfg.network.m));
  } catch (const std::exception& e) {
    add("network-doubly-stochastic-connected", false, e.what());
  }

  const int m = cfg.agent_count();
  const int H = cfg.hypothesis_count();
  add("agent-count-matches-network", m == cfg.network.m,
      std::to_string(m) + " agents, network m=" + std::to_string(cfg.network.m));
  add("hypothesis-set", H >= 2 && cfg.truth_index >= 0 && cfg.truth_index < H,
      std::to_string(H) + " hypotheses, truth_index=" + std::to_string(cfg.truth_index));

  bool specs_ok = true;
  std::string specs_detail = "all agent specs well formed and family consistent";
  try {
    for (int i = 0; i < m; ++i) {
      const AgentConfig& a = cfg.agents[i];
      if (static_cast<int>(a.evidence.size()) != H) {
        throw std::invalid_argument("agent " + std::to_string(i + 1) +
                                    ": evidence list length != hypothesis count");
      }
      validate_spec(a.observed);
      for (const auto& e : a.evidence) validate_spec(e);

      const auto check_dim = [&](const DistributionSpec& s, int want, const char* what) {
        if (dimension_of(s) != want) {
          throw std::invalid_argument("agent " + std::to_string(i + 1) + ": " + what +
                                      " dimension mismatch");
        }
      };
      switch (a.family) {
        case ModelFamily::multinomial: {
          const auto* obs = std::get_if<MultinomialSpec>(&a.observed);
          if (obs == nullptr) {
            throw std::invalid_argument("agent " + std::to_string(i + 1) +
                                        ": multinomial family needs categorical observations");
          }
          if (obs->pi.minCoeff() <= 0.0) {
            throw std::invalid_argument("agent " + std::to_string(i + 1) +
                                        ": observed category distribution must be strictly "
                                        "positive (simplex boundary)");
          }
          for (const auto& e : a.evidence) {
            if (!std::holds_alternative<MultinomialSpec>(e) ||
                std::get<MultinomialSpec>(e).pi.size() != obs->pi.size()) {
              throw std::invalid_argument("agent " + std::to_string(i + 1) +
                                          ": evidence outcome count mismatch");
            }
          }
          break;
        }
        case ModelFamily::gaussian: {
          if (std::holds_alternative<MultinomialSpec>(a.observed)) {
            throw std::invalid_argument("agent " + std::to_string(i + 1) +
                                        ": gaussian family needs continuous observations");
          }
          const int d = dimension_of(a.observed);
          for (const auto& e : a.evidence) check_dim(e, d, "evidence");
          break;
        }
        case ModelFamily::grid: {
          validate_grid(cfg.grid);
          check_dim(a.observed, cfg.grid.dims(), "observed");
          for (const auto& e : a.evidence) check_dim(e, cfg.grid.dims(), "evidence");
          // must be closed-form griddable; throws otherwise
          cell_probabilities(cfg.grid, a.observed);
          for (const auto& e : a.evidence) cell_probabilities(cfg.grid, e);
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    specs_ok = false;
    specs_detail = e.what();
  }
  add("distribution-specs", specs_ok, specs_detail);

  const bool range_ok = cfg.evidence_range.certain ||
                        (cfg.evidence_range.lo >= 0 && cfg.evidence_range.lo <= cfg.evidence_range.hi);
  add("evidence-range", range_ok,
      cfg.evidence_range.certain
          ? "certain regime"
          : "[" + std::to_string(cfg.evidence_range.lo) + "," +
                std::to_string(cfg.evidence_range.hi) + "]");
  add("horizon", cfg.horizon >= 1 && cfg.checkpoint_count >= 2 && cfg.runs >= 1,
      "T=" + std::to_string(cfg.horizon) + ", checkpoints=" + std::to_string(cfg.checkpoint_count) +
          ", runs=" + std::to_string(cfg.runs));

  if (specs_ok && m == cfg.network.m && H >= 2 && cfg.truth_index < H) {
    const IdentifiabilityReport rep = check_identifiability(cfg);
    const bool unique =
        rep.intersection.size() == 1 && rep.intersection[0] == cfg.truth_index;
    std::ostringstream os;
    os << "per-agent indistinguishable sets:";
    for (int i = 0; i < m; ++i) {
      os << " agent" << (i + 1) << "=" << set_to_string(rep.argmin_sets[i], cfg.hypotheses);
    }
    os << "; intersection=" << set_to_string(rep.intersection, cfg.hypotheses);
    add("identifiability-unique-truth", unique, os.str());

    const bool model_unique = rep.intersection_model.size() == 1 &&
                              rep.intersection_model[0] == cfg.truth_index;
    std::ostringstream osm;
    osm << "through the model family: intersection="
        << set_to_string(rep.intersection_model, cfg.hypotheses);
    if (!model_unique) {
      osm << " (the family cannot separate these hypotheses; beliefs will mix them)";
    }
    // informational: a confusable projection is the misspecification regime,
    // not a config error
    add("model-projection-note", true, osm.str());
  }

  return checks;
}

}  // namespace um
