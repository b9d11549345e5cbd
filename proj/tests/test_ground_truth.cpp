#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "um/ground_truth.hpp"
#include "um/math_util.hpp"

using namespace um;

namespace {

MixtureSpec quad_mixture(double offset, double variance) {
  MixtureSpec mix;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      mix.components.push_back({0.25, Eigen::Vector2d(sx * offset, sy * offset),
                                variance * Eigen::Matrix2d::Identity()});
    }
  }
  return mix;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_NOTHROW(validate_spec(GaussianSpec{Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()}));
  Eigen::Matrix2d asym;
  asym << 1.0, 0.2, 0.3, 1.0;
  CHECK_THROWS(validate_spec(GaussianSpec{Eigen::Vector2d::Zero(), asym}));
  Eigen::Matrix2d indef;
  indef << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS(validate_spec(GaussianSpec{Eigen::Vector2d::Zero(), indef}));

  CHECK_NOTHROW(validate_spec(MultinomialSpec{Eigen::Vector3d(0.5, 0.5, 0.0)}));
  CHECK_THROWS(validate_spec(MultinomialSpec{Eigen::Vector3d(0.5, 0.6, 0.0)}));
  CHECK_THROWS(validate_spec(MultinomialSpec{Eigen::Vector3d(1.2, -0.2, 0.0)}));

  MixtureSpec badw = quad_mixture(1.0, 1.0);
  badw.components[0].weight = 0.3;
  CHECK_THROWS(validate_spec(badw));
  CHECK_NOTHROW(validate_spec(quad_mixture(1.0, 1.0)));
}

TEST_CASE("moment matching the three reference mixtures") {
  const GaussianSpec f1 = moment_match_gaussian(quad_mixture(1.5, 0.12));
  CHECK(f1.mean.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((f1.cov - 2.37 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  const GaussianSpec f2 = moment_match_gaussian(quad_mixture(1.0, 1.37));
  CHECK((f2.cov - 2.37 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  const GaussianSpec f3 = moment_match_gaussian(quad_mixture(1.5, 0.25));
  CHECK((f3.cov - 2.5 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  // gaussian specs pass through untouched
  const GaussianSpec g{Eigen::Vector2d(1.0, -1.0), 2.0 * Eigen::Matrix2d::Identity()};
  const GaussianSpec fit = moment_match_gaussian(g);
  CHECK((fit.mean - g.mean).norm() == 0.0);
  CHECK((fit.cov - g.cov).norm() == 0.0);
}

TEST_CASE("closed-form gaussian divergence at pinned values") {
  const GaussianSpec p{Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()};
  const GaussianSpec q11{Eigen::Vector2d::Zero(), 1.1 * Eigen::Matrix2d::Identity()};
  const GaussianSpec q15{Eigen::Vector2d::Zero(), 1.5 * Eigen::Matrix2d::Identity()};
  CHECK(kl_gaussian(p, q11) ==
        doctest::Approx(1.0 / 1.1 - 1.0 + std::log(1.1)).epsilon(1e-12));
  CHECK(kl_gaussian(p, q15) == doctest::Approx(0.07213177499).epsilon(1e-9));
  CHECK(kl_gaussian(p, p) == doctest::Approx(0.0).epsilon(1e-14));

  // mean shift in one dimension
  Eigen::VectorXd m0(1), m1(1);
  m0 << 0.0;
  m1 << 1.0;
  Eigen::MatrixXd v1(1, 1), v2(1, 1);
  v1 << 1.0;
  v2 << 2.0;
  const double expect = 0.5 * (0.5 + 0.5 - 1.0 + std::log(2.0));
  CHECK(kl_gaussian({m0, v1}, {m1, v2}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("categorical divergence handles zeros correctly") {
  CHECK(kl_multinomial(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.25, 0.75)) ==
        doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)).epsilon(1e-13));
  CHECK(kl_multinomial(Eigen::Vector3d(0.5, 0.5, 0.0), Eigen::Vector3d(0.5, 0.25, 0.25)) ==
        doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-13));
  CHECK(std::isinf(kl_multinomial(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1.0, 0.0))));
  CHECK(kl_multinomial(Eigen::Vector2d(0.3, 0.7), Eigen::Vector2d(0.3, 0.7)) == 0.0);
}

TEST_CASE("monte carlo divergence brackets the closed form") {
  Eigen::VectorXd m0(1), m1(1);
  m0 << 0.0;
  m1 << 1.0;
  Eigen::MatrixXd v1(1, 1), v2(1, 1);
  v1 << 1.0;
  v2 << 2.0;
  const GaussianSpec p{m0, v1}, q{m1, v2};
  const double exact = kl_gaussian(p, q);
  const KlEstimate est = kl_monte_carlo(p, q, 200000, 555);
  CHECK(est.samples == 200000);
  CHECK(est.stderr_ > 0.0);
  CHECK(est.stderr_ < 0.01);
  CHECK(std::abs(est.value - exact) < 4.0 * est.stderr_);
}

TEST_CASE("kl_between picks the exact route when one exists") {
  const KlEstimate cat = kl_between(MultinomialSpec{Eigen::Vector2d(0.5, 0.5)},
                                    MultinomialSpec{Eigen::Vector2d(0.25, 0.75)}, 1000, 1);
  CHECK(cat.stderr_ == 0.0);
  CHECK(cat.value == doctest::Approx(0.5 * std::log(4.0 / 3.0)).epsilon(1e-13));

  const GaussianSpec p{Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()};
  const GaussianSpec q{Eigen::Vector2d::Zero(), 1.5 * Eigen::Matrix2d::Identity()};
  const KlEstimate gg = kl_between(p, q, 1000, 1);
  CHECK(gg.stderr_ == 0.0);
  CHECK(gg.value == doctest::Approx(kl_gaussian(p, q)).epsilon(1e-13));

  const KlEstimate mg = kl_between(quad_mixture(1.5, 0.12), q, 20000, 7);
  CHECK(mg.stderr_ > 0.0);

  CHECK_THROWS(kl_between(MultinomialSpec{Eigen::Vector2d(0.5, 0.5)}, p, 1000, 1));
}

TEST_CASE("the moment-matched fit beats nearby covariance scalings") {
  const MixtureSpec mix = quad_mixture(1.5, 0.12);
  const GaussianSpec fit = moment_match_gaussian(mix);
  const std::uint64_t seed = 2718;
  const double at_fit = kl_monte_carlo(mix, fit, 100000, seed).value;
  for (double scale : {0.95, 1.05}) {
    const GaussianSpec off{fit.mean, scale * fit.cov};
    const double at_off = kl_monte_carlo(mix, off, 100000, seed).value;
    CHECK(at_fit < at_off);
  }
}

TEST_CASE("sampler determinism and stream layout") {
  const GaussianSpec g{Eigen::Vector2d(1.0, -2.0), 4.0 * Eigen::Matrix2d::Identity()};
  Sampler s1(g), s2(g);
  RngStream r1(42), r2(42);
  for (int i = 0; i < 20; ++i) {
    CHECK((s1.sample_point(r1) - s2.sample_point(r2)).cwiseAbs().maxCoeff() == 0.0);
  }

  // a gaussian draw is mean + sqrt(cov) z, no leading uniform
  RngStream rm(77), rs(77);
  Eigen::Vector2d z;
  z[0] = rm.normal();
  z[1] = rm.normal();
  const Eigen::Vector2d manual = g.mean + 2.0 * z;
  Sampler sg(g);
  CHECK((sg.sample_point(rs) - manual).cwiseAbs().maxCoeff() < 1e-15);

  // a mixture draw spends one uniform on the component first
  MixtureSpec one;
  one.components.push_back({1.0, g.mean, g.cov});
  RngStream rm2(77), rs2(77);
  (void)rm2.uniform01();
  Eigen::Vector2d z2;
  z2[0] = rm2.normal();
  z2[1] = rm2.normal();
  const Eigen::Vector2d manual2 = g.mean + 2.0 * z2;
  Sampler sm(one);
  CHECK((sm.sample_point(rs2) - manual2).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("mixture component frequencies follow the weights") {
  MixtureSpec mix;
  mix.components.push_back({0.7, Eigen::VectorXd::Constant(1, -10.0), Eigen::MatrixXd::Identity(1, 1)});
  mix.components.push_back({0.3, Eigen::VectorXd::Constant(1, 10.0), Eigen::MatrixXd::Identity(1, 1)});
  Sampler s(mix);
  RngStream rng(13);
  int low = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    if (s.sample_point(rng)[0] < 0.0) ++low;
  }
  CHECK(std::abs(low / static_cast<double>(n) - 0.7) < 0.01);
}

TEST_CASE("categorical sampling matches the masses") {
  const MultinomialSpec pi{Eigen::Vector3d(0.2, 0.5, 0.3)};
  Sampler s(pi);
  CHECK(s.is_categorical());
  RngStream rng(99);
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  const int n = 60000;
  for (int i = 0; i < n; ++i) counts[s.sample_category(rng)] += 1.0;
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(counts[k] / n - pi.pi[k]) < 0.01);
  }
  CHECK_THROWS(s.sample_point(rng));
}

TEST_CASE("densities and masses evaluate correctly") {
  const GaussianSpec g{Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()};
  const Eigen::Vector2d x(0.5, -0.5);
  CHECK(spec_logpdf(g, x) == doctest::Approx(gaussian_logpdf(x, g.mean, g.cov)).epsilon(1e-15));

  const MixtureSpec mix = quad_mixture(1.0, 0.5);
  double direct = 0.0;
  for (const auto& c : mix.components) {
    direct += c.weight * std::exp(gaussian_logpdf(x, c.mean, c.cov));
  }
  CHECK(spec_logpdf(mix, x) == doctest::Approx(std::log(direct)).epsilon(1e-12));

  const MultinomialSpec pi{Eigen::Vector2d(0.25, 0.75)};
  CHECK(spec_logpmf(pi, 1) == doctest::Approx(std::log(0.75)).epsilon(1e-15));
  CHECK_THROWS(spec_logpmf(pi, 2));
  CHECK_THROWS(spec_logpdf(pi, x));
}

TEST_CASE("spec json round trips") {
  const DistributionSpec specs[] = {
      DistributionSpec(GaussianSpec{Eigen::Vector2d(0.5, -1.0), 2.0 * Eigen::Matrix2d::Identity()}),
      DistributionSpec(quad_mixture(1.5, 0.12)),
      DistributionSpec(MultinomialSpec{Eigen::Vector3d(0.2, 0.3, 0.5)})};
  for (const auto& spec : specs) {
    nlohmann::json j;
    to_json(j, spec);
    DistributionSpec back;
    from_json(j, back);
    CHECK(back.index() == spec.index());
    nlohmann::json j2;
    to_json(j2, back);
    CHECK(j == j2);
  }

  nlohmann::json bad = {{"type", "laplace"}};
  DistributionSpec target;
  CHECK_THROWS(from_json(bad, target));
}
