// um: validate configs, run experiments, compute convergence targets,
// cross-check oracles, and summarize results.
//
// Exit codes: 0 success, 1 invariant or oracle failure, 2 usage/config error.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "um/config.hpp"
#include "um/network.hpp"
#include "um/oracles.hpp"
#include "um/rng.hpp"
#include "um/serialize.hpp"
#include "um/simulation.hpp"

namespace {

using um::ExperimentConfig;

std::string set_to_string(const std::vector<int>& idx, const std::vector<std::string>& names) {
  std::string s = "{";
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k) s += ", ";
    s += names[static_cast<std::size_t>(idx[k])];
  }
  return s + "}";
}

void print_check(const um::CheckResult& c) {
  std::printf("[%s] %-38s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
}

int cmd_validate(const std::string& config) {
  const ExperimentConfig cfg = um::load_config(config);
  const auto checks = um::validate_experiment(cfg);
  bool all_pass = true;
  for (const auto& c : checks) {
    print_check(c);
    all_pass = all_pass && c.pass;
  }

  const um::IdentifiabilityReport rep = um::check_identifiability(cfg);
  std::printf("\nindistinguishable hypothesis sets (data-level KL argmin per agent):\n");
  for (int i = 0; i < cfg.agent_count(); ++i) {
    std::printf("  agent %d: %s\n", i + 1,
                set_to_string(rep.argmin_sets[static_cast<std::size_t>(i)], cfg.hypotheses).c_str());
  }
  std::printf("  intersection: %s\n", set_to_string(rep.intersection, cfg.hypotheses).c_str());
  if (rep.intersection_model != rep.intersection) {
    std::printf("  through the model family: %s\n",
                set_to_string(rep.intersection_model, cfg.hypotheses).c_str());
  }
  return all_pass ? 0 : 1;
}

int cmd_run(const std::string& config, std::optional<std::string> out_dir,
            std::optional<std::uint64_t> seed, std::optional<int> runs,
            std::optional<std::int64_t> horizon, bool serial) {
  ExperimentConfig cfg = um::load_config(config);
  if (seed) cfg.master_seed = *seed;
  if (runs) cfg.runs = *runs;
  if (horizon) cfg.horizon = *horizon;
  const std::string dir = out_dir ? *out_dir : "out/" + cfg.name;

  const um::EnsembleResult ens =
      um::run_ensemble(cfg, serial ? um::Execution::serial : um::Execution::parallel);
  um::write_outputs(cfg, ens, dir);

  std::printf("%s: %zu/%d runs completed, horizon %lld, outputs in %s\n", cfg.name.c_str(),
              ens.runs.size(), cfg.runs, static_cast<long long>(cfg.horizon), dir.c_str());
  for (const auto& f : ens.failures) {
    std::fprintf(stderr, "run %d failed: %s\n", f.run_index, f.reason.c_str());
  }

  double residual = 0.0;
  for (const auto& run : ens.runs) {
    residual = std::max(residual, um::max_centralization_residual(run));
  }
  std::printf("centralization residual %.3g (tol 1e-8)\n", residual);
  if (!ens.failures.empty() || residual >= 1e-8 || ens.runs.empty()) return 1;
  return 0;
}

int cmd_targets(const std::string& config, std::optional<std::uint64_t> seed,
                std::optional<int> runs, std::optional<double> nominal,
                std::optional<std::string> out_file) {
  ExperimentConfig cfg = um::load_config(config);
  if (seed) cfg.master_seed = *seed;
  if (runs) cfg.runs = *runs;

  nlohmann::json j;
  j["hypotheses"] = cfg.hypotheses;
  j["certain"] = cfg.evidence_range.certain;

  if (cfg.evidence_range.certain) {
    const Eigen::VectorXd slopes = um::certain_slope_targets(cfg);
    j["slope_target"] = um::vector_to_json(slopes);
    std::printf("certain regime, per-hypothesis belief slope targets:\n");
    for (int h = 0; h < cfg.hypothesis_count(); ++h) {
      std::printf("  %-10s %+.6f nats/step\n", cfg.hypotheses[h].c_str(), slopes[h]);
    }
  } else {
    Eigen::MatrixXd mean =
        Eigen::MatrixXd::Zero(cfg.agent_count(), cfg.hypothesis_count());
    j["per_run"] = nlohmann::json::array();
    for (int r = 0; r < cfg.runs; ++r) {
      const std::uint64_t run_seed = um::split_seed(cfg.master_seed, static_cast<std::uint64_t>(r));
      const um::EvidenceDraw draw = um::draw_evidence(cfg, run_seed);
      mean += draw.target_log_ulr / static_cast<double>(cfg.runs);
      j["per_run"].push_back(
          {{"run", r},
           {"seed", run_seed},
           {"evidence_sizes", um::matrix_to_json(draw.evidence_sizes)},
           {"per_agent_log_ulr_target", um::matrix_to_json(draw.target_log_ulr)},
           {"network_target", um::vector_to_json(um::convergence_target(draw.target_log_ulr))}});
    }
    j["per_agent_log_ulr_target_mean"] = um::matrix_to_json(mean);
    const Eigen::VectorXd net = um::convergence_target(mean);
    j["network_target_mean"] = um::vector_to_json(net);
    std::printf("network-mean log likelihood ratio targets over %d evidence draws:\n", cfg.runs);
    for (int h = 0; h < cfg.hypothesis_count(); ++h) {
      std::printf("  %-10s %+.6f\n", cfg.hypotheses[h].c_str(), net[h]);
    }
    if (nominal) {
      const Eigen::MatrixXd nom = um::nominal_target_log_ulr(cfg, *nominal);
      j["nominal"] = {{"n", *nominal},
                      {"per_agent", um::matrix_to_json(nom)},
                      {"network", um::vector_to_json(um::convergence_target(nom))}};
      std::printf("nominal targets at evidence volume %g:\n", *nominal);
      const Eigen::VectorXd nnet = um::convergence_target(nom);
      for (int h = 0; h < cfg.hypothesis_count(); ++h) {
        std::printf("  %-10s %+.6f\n", cfg.hypotheses[h].c_str(), nnet[h]);
      }
    }
  }
  if (out_file) {
    std::ofstream out(*out_file);
    if (!out) throw std::runtime_error("cannot write " + *out_file);
    out << j.dump(2) << '\n';
  }
  return 0;
}

void print_oracle(const char* name, const um::OracleOutcome& o) {
  std::printf("[%s] %-12s %d instances, max |delta log Lambda| = %.3g (tol %g)\n",
              o.pass ? "PASS" : "FAIL", name, o.instances, o.max_abs_delta, o.tolerance);
}

int cmd_oracle(const std::string& family, int instances, std::uint64_t seed) {
  bool ok = true;
  if (family == "multinomial" || family == "all") {
    const auto o = um::oracle_multinomial(instances, seed);
    print_oracle("multinomial", o);
    ok = ok && o.pass;
  }
  if (family == "gaussian" || family == "all") {
    const auto o = um::oracle_gaussian(instances, seed);
    print_oracle("gaussian", o);
    ok = ok && o.pass;
    const auto q = um::oracle_quadrature(instances, seed);
    print_oracle("quadrature", q);
    ok = ok && q.pass;
  }
  return ok ? 0 : 1;
}

struct ReportCheck {
  std::string name;
  bool pass = true;
  bool counted = true;  // informational rows don't affect the exit code
  std::string detail;
};

int cmd_report(const std::string& dir) {
  namespace fs = std::filesystem;
  for (const char* f : {"summary.json", "targets.json", "beliefs.csv", "config.json"}) {
    if (!fs::exists(fs::path(dir) / f)) {
      throw std::runtime_error("missing " + (fs::path(dir) / f).string());
    }
  }
  std::ifstream in(fs::path(dir) / "summary.json");
  const nlohmann::json s = nlohmann::json::parse(in);

  const std::vector<std::string> hyps = s.at("hypotheses").get<std::vector<std::string>>();
  const bool certain = s.at("certain").get<bool>();
  const int truth = s.at("truth_index").get<int>();
  const auto horizon = s.at("horizon").get<std::int64_t>();
  const int H = static_cast<int>(hyps.size());

  if (!s.contains("network_final_mean")) {
    std::fprintf(stderr, "no completed runs in %s\n", dir.c_str());
    return 1;
  }
  const auto final_mean = s.at("network_final_mean").get<std::vector<double>>();
  const auto gaps = certain ? std::vector<double>(static_cast<std::size_t>(H), 0.0)
                            : s.at("consensus_gap_final_mean").get<std::vector<double>>();
  const auto slopes = s.at("slopes_network").get<std::vector<double>>();

  std::vector<int> order(static_cast<std::size_t>(H));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return final_mean[a] > final_mean[b]; });

  std::vector<ReportCheck> checks;

  if (certain) {
    const auto target = s.at("slope_target").get<std::vector<double>>();
    std::printf("%-10s %16s %16s %16s\n", "hypothesis", "final log-belief", "slope",
                "slope target");
    for (const int h : order) {
      std::printf("%-10s %16.4f %16.6f %16.6f\n", hyps[h].c_str(), final_mean[h], slopes[h],
                  target[h]);
    }
    bool neg = true, within = true;
    double worst_rel = 0.0;
    for (int h = 0; h < H; ++h) {
      if (h == truth) continue;
      neg = neg && slopes[h] < 0.0;
      const double rel = std::abs(slopes[h] - target[h]) / std::abs(target[h]);
      worst_rel = std::max(worst_rel, rel);
      within = within && rel <= 0.10;
    }
    checks.push_back({"off-truth-slopes-negative", neg, true, ""});
    char buf[64];
    std::snprintf(buf, sizeof buf, "max relative error %.1f%% (tol 10%%)", 100.0 * worst_rel);
    checks.push_back({"slopes-match-divergence-targets", within, true, buf});

    const auto running_max = s.at("network_running_max").get<std::vector<double>>();
    const double drop = running_max[truth] - final_mean[truth];
    std::snprintf(buf, sizeof buf, "truth final %.3f below running max (tol 0.2)", drop);
    checks.push_back({"truth-tracks-running-max", drop <= 0.2, true, buf});
  } else {
    const bool have_targets = s.contains("target_network_mean");
    const auto target = have_targets ? s.at("target_network_mean").get<std::vector<double>>()
                                     : std::vector<double>(static_cast<std::size_t>(H), 0.0);
    std::printf("%-10s %16s %16s %14s %12s\n", "hypothesis", "final log-belief", "target",
                "gap(mean)", "slope");
    for (const int h : order) {
      std::printf("%-10s %16.4f %16.4f %14.4f %12.6f\n", hyps[h].c_str(), final_mean[h],
                  target[h], gaps[h], slopes[h]);
    }
    // The proximity and consensus tolerances are asymptotic statements;
    // they get verdicts only at the horizon they were pinned at.
    const bool asymptotic = horizon >= 100000;
    double worst_gap = 0.0, worst_dev = 0.0;
    for (int h = 0; h < H; ++h) {
      worst_gap = std::max(worst_gap, gaps[h]);
      worst_dev = std::max(worst_dev, std::abs(final_mean[h] - target[h]));
    }
    char buf[80];
    std::snprintf(buf, sizeof buf, "max mean gap %.4f (tol 0.05%s)", worst_gap,
                  asymptotic ? "" : ", informational at this horizon");
    checks.push_back({"consensus-gap", worst_gap <= 0.05, asymptotic, buf});
    if (have_targets) {
      std::snprintf(buf, sizeof buf, "max |final - target| %.4f (tol 0.3%s)", worst_dev,
                    asymptotic ? "" : ", informational at this horizon");
      checks.push_back({"beliefs-near-targets", worst_dev <= 0.3, asymptotic, buf});
    }
  }

  const double top = *std::max_element(final_mean.begin(), final_mean.end());
  checks.push_back({"truth-ranked-top", final_mean[truth] >= top - 1e-12, true, hyps[truth]});

  const auto inv = s.at("invariants");
  char buf[80];
  std::snprintf(buf, sizeof buf, "max |residual| = %.3g (tol 1e-8)",
                inv.at("centralization_max_abs_residual").get<double>());
  checks.push_back({"centralization-identity", inv.at("centralization_ok").get<bool>(), true, buf});
  checks.push_back({"all-finite", inv.at("all_finite").get<bool>(), true, ""});

  const auto failures = s.at("failures");
  if (!failures.empty()) {
    checks.push_back({"all-runs-completed", false, true,
                      std::to_string(failures.size()) + " failed runs"});
  }

  std::printf("\n");
  bool ok = true;
  for (const auto& c : checks) {
    std::printf("[%s] %-34s %s\n", c.pass ? "PASS" : (c.counted ? "FAIL" : "info"),
                c.name.c_str(), c.detail.c_str());
    ok = ok && (c.pass || !c.counted);
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("UM_THREADS")) {
    const int n = std::atoi(env);
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
  }

  CLI::App app{"uncertain-model social learning experiments"};
  app.require_subcommand(1);

  std::string config, out_dir, out_file, family = "all", report_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<std::int64_t> horizon;
  std::optional<double> nominal;
  bool serial = false;
  int instances = 100;
  std::uint64_t oracle_seed = 7;

  auto* validate = app.add_subcommand("validate", "check a config against the model assumptions");
  validate->add_option("config", config, "preset name or JSON path")->required();

  auto* run = app.add_subcommand("run", "run a Monte Carlo ensemble and write outputs");
  run->add_option("config", config, "preset name or JSON path")->required();
  std::string run_out;
  run->add_option("--out", run_out, "output directory (default out/<name>)");
  run->add_option("--seed", seed, "master seed override");
  run->add_option("--runs", runs, "Monte Carlo run count override");
  run->add_option("--horizon", horizon, "time horizon override");
  run->add_flag("--serial", serial, "use the serial reference path");

  auto* targets = app.add_subcommand("targets", "compute convergence targets without simulating");
  targets->add_option("config", config, "preset name or JSON path")->required();
  targets->add_option("--seed", seed, "master seed override");
  targets->add_option("--runs", runs, "evidence draw count override");
  targets->add_option("--nominal", nominal, "also print noise-free targets at this evidence volume");
  targets->add_option("--out", out_file, "write JSON here");

  auto* oracle = app.add_subcommand("oracle", "randomized recursion-vs-batch cross-checks");
  oracle->add_option("--family", family, "multinomial | gaussian | all")
      ->check(CLI::IsMember({"multinomial", "gaussian", "all"}));
  oracle->add_option("--instances", instances, "instances per suite")
      ->check(CLI::NonNegativeNumber);
  oracle->add_option("--seed", oracle_seed, "oracle seed");

  auto* report = app.add_subcommand("report", "summarize a run directory against tolerances");
  report->add_option("dir", report_dir, "directory written by run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(config);
    if (run->parsed()) {
      return cmd_run(config,
                     run_out.empty() ? std::nullopt : std::optional<std::string>(run_out), seed,
                     runs, horizon, serial);
    }
    if (targets->parsed()) {
      return cmd_targets(config, seed, runs, nominal,
                         out_file.empty() ? std::nullopt : std::optional<std::string>(out_file));
    }
    if (oracle->parsed()) return cmd_oracle(family, instances, oracle_seed);
    if (report->parsed()) return cmd_report(report_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
