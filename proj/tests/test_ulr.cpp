#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "um/errors.hpp"
#include "um/ground_truth.hpp"
#include "um/oracles.hpp"
#include "um/rng.hpp"
#include "um/uncertain_model.hpp"

using namespace um;

TEST_CASE("single-step update with evidence (3,1)") {
  UncertainModel m = UncertainModel::multinomial(Eigen::Vector2d(3.0, 1.0));
  const double log_ell = m.update(0);
  CHECK(std::exp(log_ell) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(m.log_ulr() == log_ell);
  CHECK(m.evidence_count() == 4);
}

TEST_CASE("batch ratio for one evidence sample and two matching observations") {
  const double log_ulr =
      batch_log_ulr(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(2.0, 0.0));
  CHECK(std::exp(log_ulr) == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("asymptotic ratio at the uniform truth") {
  const double v = asymptotic_log_ulr(Eigen::Vector2d(2.0, 0.0), Eigen::Vector2d(0.5, 0.5));
  CHECK(std::exp(v) == doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("asymptotic ratio rejects boundary and non-normalized truths") {
  CHECK_THROWS(asymptotic_log_ulr(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(1.0, 0.0)));
  CHECK_THROWS(asymptotic_log_ulr(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(0.5, 0.4)));
}

TEST_CASE("vacuous evidence gives exactly zero log ratio") {
  UncertainModel mult = UncertainModel::multinomial(Eigen::Vector3d::Zero());
  RngStream rng(11);
  for (int t = 0; t < 500; ++t) {
    const int k = static_cast<int>(rng.uniform_int(0, 2));
    CHECK(mult.update(k) == 0.0);
  }
  CHECK(mult.log_ulr() == 0.0);

  UncertainModel gauss = UncertainModel::gaussian(2, {});
  for (int t = 0; t < 500; ++t) {
    CHECK(gauss.update(Eigen::Vector2d(rng.normal(), rng.normal())) == 0.0);
  }
  CHECK(gauss.log_ulr() == 0.0);
}

TEST_CASE("recursion reproduces the batch value on a fixed stream") {
  const Eigen::Vector3d evidence(5.0, 2.0, 1.0);
  const std::vector<int> obs = {0, 2, 1, 0, 0, 1, 2, 2, 0, 1, 1, 0};
  UncertainModel m = UncertainModel::multinomial(evidence);
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  double acc = 0.0;
  for (int k : obs) {
    acc += m.update(k);
    counts[k] += 1.0;
  }
  const double batch = batch_log_ulr(evidence, counts);
  CHECK(acc == doctest::Approx(batch).epsilon(1e-12));
  CHECK(m.log_ulr() == doctest::Approx(batch).epsilon(1e-12));
}

TEST_CASE("the log ratio is exchangeable in the observation order") {
  const Eigen::Vector3d evidence(2.0, 4.0, 1.0);
  std::vector<int> obs = {0, 1, 1, 2, 0, 1, 2, 2, 1, 0};
  UncertainModel a = UncertainModel::multinomial(evidence);
  for (int k : obs) a.update(k);
  std::vector<int> rev(obs.rbegin(), obs.rend());
  UncertainModel b = UncertainModel::multinomial(evidence);
  for (int k : rev) b.update(k);
  CHECK(std::abs(a.log_ulr() - b.log_ulr()) < 1e-10);

  std::vector<Eigen::VectorXd> ev = {Eigen::Vector2d(0.4, -0.2), Eigen::Vector2d(-1.0, 0.3)};
  std::vector<Eigen::VectorXd> pts = {Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(-0.5, 1.0),
                                      Eigen::Vector2d(0.9, -0.3), Eigen::Vector2d(0.0, 0.7)};
  UncertainModel g1 = UncertainModel::gaussian(2, ev);
  for (const auto& x : pts) g1.update(x);
  UncertainModel g2 = UncertainModel::gaussian(2, ev);
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) g2.update(*it);
  CHECK(std::abs(g1.log_ulr() - g2.log_ulr()) < 1e-10);
}

TEST_CASE("randomized cross-checks against the closed forms") {
  const OracleOutcome mult = oracle_multinomial(30, 1234);
  CHECK(mult.pass);
  CHECK(mult.max_abs_delta < mult.tolerance);

  const OracleOutcome gauss = oracle_gaussian(30, 1234);
  CHECK(gauss.pass);

  const OracleOutcome quad = oracle_quadrature(10, 1234);
  CHECK(quad.pass);
}

TEST_CASE("prior overrides stay consistent between recursion and batch") {
  DirichletParams prior{Eigen::Vector2d(2.0, 0.5)};
  const Eigen::Vector2d evidence(3.0, 1.0);
  UncertainModel m = UncertainModel::multinomial(evidence, prior);
  const std::vector<int> obs = {0, 1, 0, 0, 1};
  Eigen::Vector2d counts = Eigen::Vector2d::Zero();
  double acc = 0.0;
  for (int k : obs) {
    acc += m.update(k);
    counts[k] += 1.0;
  }
  CHECK(acc == doctest::Approx(batch_log_ulr(prior, evidence, counts)).epsilon(1e-12));

  NiwParams nprior{Eigen::VectorXd::Zero(2), 2.0, 5.0, 2.0 * Eigen::Matrix2d::Identity()};
  std::vector<Eigen::VectorXd> ev = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, -1.0)};
  std::vector<Eigen::VectorXd> pts = {Eigen::Vector2d(0.3, 0.4), Eigen::Vector2d(-0.2, 0.9),
                                      Eigen::Vector2d(1.1, -0.6)};
  UncertainModel g = UncertainModel::gaussian(nprior, ev);
  double gacc = 0.0;
  for (const auto& x : pts) gacc += g.update(x);
  CHECK(gacc == doctest::Approx(batch_log_ulr(nprior, ev, pts)).epsilon(1e-11));
}

TEST_CASE("certain model with zero-mass outcome raises a support violation") {
  UncertainModel m = UncertainModel::certain(MultinomialSpec{Eigen::Vector2d(1.0, 0.0)});
  CHECK_NOTHROW(m.update(0));
  CHECK_THROWS_AS(m.update(1), SupportViolationError);
}

TEST_CASE("certain model at a uniform parameter over a balanced stream") {
  // pi_theta == the data distribution, so log ell must head to zero
  UncertainModel m = UncertainModel::certain(MultinomialSpec{Eigen::Vector2d(0.5, 0.5)});
  RngStream rng(404);
  double last = 0.0;
  for (int t = 0; t < 10000; ++t) {
    last = m.update(static_cast<int>(rng.uniform_int(0, 1)));
  }
  CHECK(std::abs(last) < 0.05);
}

TEST_CASE("matched certain model keeps late per-step updates small across seeds") {
  int good = 0;
  for (int run = 0; run < 10; ++run) {
    UncertainModel m = UncertainModel::certain(MultinomialSpec{Eigen::Vector3d(0.5, 0.3, 0.2)});
    Sampler sampler(MultinomialSpec{Eigen::Vector3d(0.5, 0.3, 0.2)});
    RngStream rng(split_seed(606, static_cast<std::uint64_t>(run)));
    double last = 0.0;
    for (int t = 0; t < 10000; ++t) last = m.update(sampler.sample_category(rng));
    if (std::abs(last) < 0.05) ++good;
  }
  CHECK(good >= 9);
}

TEST_CASE("mismatched certain model drifts at the divergence difference rate") {
  const Eigen::Vector2d truth(0.6, 0.4);
  const Eigen::Vector2d theta(0.4, 0.6);
  UncertainModel m = UncertainModel::certain(MultinomialSpec{theta});
  Sampler sampler(MultinomialSpec{truth});
  RngStream rng(808);
  double window_sum = 0.0;
  int window_n = 0;
  for (int t = 1; t <= 20000; ++t) {
    const double log_ell = m.update(sampler.sample_category(rng));
    if (t > 1000) {
      window_sum += log_ell;
      ++window_n;
    }
  }
  const double avg = window_sum / window_n;
  const double target = -kl_multinomial(truth, theta);
  CHECK(std::abs(avg - target) < 0.1 * std::abs(target));
}

TEST_CASE("realized ratio lands near the asymptote for heavy evidence") {
  // evidence drawn from the truth itself; the realized final ratio should
  // sit within a factor of two of the asymptote in most runs
  const Eigen::Vector3d pi_star(0.5, 0.3, 0.2);
  int within = 0;
  for (int run = 0; run < 10; ++run) {
    RngStream rng(split_seed(909, static_cast<std::uint64_t>(run)));
    Sampler sampler(MultinomialSpec{pi_star});
    Eigen::Vector3d evidence = Eigen::Vector3d::Zero();
    for (int s = 0; s < 500; ++s) evidence[sampler.sample_category(rng)] += 1.0;
    UncertainModel m = UncertainModel::multinomial(evidence);
    for (int t = 0; t < 100000; ++t) m.update(sampler.sample_category(rng));
    const double target = asymptotic_log_ulr(evidence, pi_star);
    if (std::abs(m.log_ulr() - target) < std::log(2.0)) ++within;
  }
  CHECK(within >= 8);
}

TEST_CASE("serialized state resumes bitwise identically") {
  const Eigen::Vector2d evidence(4.0, 2.0);
  UncertainModel live = UncertainModel::multinomial(evidence);
  const std::vector<int> head = {0, 1, 0, 0};
  for (int k : head) live.update(k);

  nlohmann::json j;
  to_json(j, live);
  UncertainModel resumed = UncertainModel::multinomial(evidence);
  from_json(j, resumed);
  CHECK(resumed.log_ulr() == live.log_ulr());

  const std::vector<int> tail = {1, 0, 1, 1, 0};
  for (int k : tail) {
    const double a = live.update(k);
    const double b = resumed.update(k);
    CHECK(a == b);
  }
  CHECK(live.log_ulr() == resumed.log_ulr());

  // gaussian state, including the certain marker
  UncertainModel gc = UncertainModel::certain(
      GaussianSpec{Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()});
  gc.update(Eigen::Vector2d(0.3, -0.4));
  nlohmann::json gj;
  to_json(gj, gc);
  UncertainModel gr = UncertainModel::certain(
      GaussianSpec{Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()});
  from_json(gj, gr);
  const double a = gc.update(Eigen::Vector2d(1.0, 0.2));
  const double b = gr.update(Eigen::Vector2d(1.0, 0.2));
  CHECK(a == b);
}

TEST_CASE("family accessors guard against the wrong regime") {
  UncertainModel m = UncertainModel::multinomial(Eigen::Vector2d(1.0, 1.0));
  CHECK_THROWS(m.theta_niw());
  CHECK_THROWS(m.update(Eigen::Vector2d(0.0, 0.0)));
  CHECK_THROWS(m.certain_params());
  UncertainModel c = UncertainModel::certain(MultinomialSpec{Eigen::Vector2d(0.5, 0.5)});
  CHECK_THROWS(c.evidence_count());
  CHECK_THROWS(c.theta_dirichlet());
  CHECK_NOTHROW(c.ignorance_dirichlet());
}
