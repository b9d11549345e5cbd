#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "um/errors.hpp"
#include "um/math_util.hpp"
#include "um/niw.hpp"
#include "um/rng.hpp"

using namespace um;

namespace {

Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

Eigen::MatrixXd mat1(double x) {
  Eigen::MatrixXd m(1, 1);
  m << x;
  return m;
}

}  // namespace

TEST_CASE("vacuous prior in two dimensions") {
  const NiwParams p = vacuous_niw(2);
  CHECK(p.dim() == 2);
  CHECK(p.kappa == 1.0);
  CHECK(p.nu == 4.0);
  CHECK(p.varpi.norm() == 0.0);
  CHECK((p.S - Eigen::Matrix2d::Identity()).norm() == 0.0);
}

TEST_CASE("two symmetric points from the vacuous prior") {
  std::vector<Eigen::VectorXd> xs = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(-1.0, 0.0)};
  const NiwParams p = niw_absorb_batch(vacuous_niw(2), xs);
  CHECK(p.kappa == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(p.nu == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(p.varpi.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(p.S(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(p.S(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(p.S(0, 1)) < 1e-14);
}

TEST_CASE("one-step update from the vacuous prior") {
  const NiwParams p = niw_absorb_one(vacuous_niw(2), Eigen::Vector2d(2.0, 0.0));
  CHECK(p.kappa == 2.0);
  CHECK(p.nu == 5.0);
  CHECK(p.varpi[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.varpi[1] == 0.0);
  CHECK(p.S(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(p.S(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("a dominant prior mean is a fixed point of the location update") {
  NiwParams p = vacuous_niw(2);
  p.kappa = 1e6;
  p.varpi = Eigen::Vector2d(1.0, 1.0);
  const NiwParams q = niw_absorb_one(p, Eigen::Vector2d(1.0, 1.0));
  CHECK(q.varpi[0] == 1.0);
  CHECK(q.varpi[1] == 1.0);
}

TEST_CASE("stats-form update matches the sequential one") {
  RngStream rng(31);
  std::vector<Eigen::VectorXd> xs;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < 40; ++i) {
    Eigen::VectorXd x(3);
    for (int k = 0; k < 3; ++k) x[k] = rng.normal() + 0.3 * k;
    xs.push_back(x);
    sum += x;
    scatter += x * x.transpose();
  }
  NiwParams seq = vacuous_niw(3);
  for (const auto& x : xs) seq = niw_absorb_one(seq, x);
  const NiwParams st = niw_absorb_stats(vacuous_niw(3), 40.0, sum, scatter);
  CHECK(std::abs(seq.kappa - st.kappa) < 1e-12);
  CHECK(std::abs(seq.nu - st.nu) < 1e-12);
  CHECK((seq.varpi - st.varpi).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((seq.S - st.S).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("absorbing zero observations is the identity") {
  const NiwParams p = vacuous_niw(2);
  const NiwParams q =
      niw_absorb_stats(p, 0.0, Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero());
  CHECK(q.kappa == p.kappa);
  CHECK(q.nu == p.nu);
  CHECK((q.varpi - p.varpi).norm() == 0.0);
  CHECK((q.S - p.S).norm() == 0.0);
}

TEST_CASE("absorption is exchangeable") {
  std::vector<Eigen::VectorXd> xs = {Eigen::Vector2d(0.3, -1.2), Eigen::Vector2d(2.0, 0.1),
                                     Eigen::Vector2d(-0.7, 0.9), Eigen::Vector2d(1.1, 1.4)};
  std::vector<Eigen::VectorXd> rev(xs.rbegin(), xs.rend());
  const NiwParams a = niw_absorb_batch(vacuous_niw(2), xs);
  const NiwParams b = niw_absorb_batch(vacuous_niw(2), rev);
  CHECK((a.varpi - b.varpi).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a.S - b.S).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(a.kappa == b.kappa);
  CHECK(a.nu == b.nu);
}

TEST_CASE("normalizer agrees with the normal-inverse-gamma form in one dimension") {
  // for d = 1, NIW(varpi, kappa, nu, S) is NIG with alpha = nu/2, beta = S/2,
  // lambda = kappa, whose normalizer is Gamma(alpha) beta^-alpha sqrt(2 pi / lambda)
  NiwParams p{vec1(0.4), 2.5, 3.0, mat1(1.7)};
  const double alpha = p.nu / 2.0;
  const double beta = p.S(0, 0) / 2.0;
  const double expected = log_gamma(alpha) - alpha * std::log(beta) +
                          0.5 * std::log(2.0 * std::numbers::pi / p.kappa);
  CHECK(niw_log_normalizer(p) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("density agrees with the factored normal times inverse-gamma form") {
  NiwParams p{vec1(0.5), 2.0, 4.0, mat1(3.0)};
  const double mu = -0.3, var = 1.4;
  const double alpha = p.nu / 2.0, beta = p.S(0, 0) / 2.0;
  const double log_ig = alpha * std::log(beta) - log_gamma(alpha) -
                        (alpha + 1.0) * std::log(var) - beta / var;
  const double log_n = gaussian_logpdf(vec1(mu), p.varpi, mat1(var / p.kappa));
  CHECK(niw_logpdf(p, vec1(mu), mat1(var)) == doctest::Approx(log_n + log_ig).epsilon(1e-11));
}

TEST_CASE("density integrates to one over mean and variance") {
  NiwParams p{vec1(0.2), 1.5, 4.0, mat1(2.0)};
  using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
  const auto outer = [&](double u) {  // u = log variance
    const double var = std::exp(u);
    // the quadrature probes u far enough out that exp under/overflows;
    // the density is zero there
    if (var <= 0.0 || !std::isfinite(var)) return 0.0;
    const auto inner = [&](double mu) {
      return std::exp(niw_logpdf(p, vec1(mu), mat1(var)));
    };
    return var * gk::integrate(inner, -std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity(), 10, 1e-10);
  };
  const double total = gk::integrate(outer, -std::numeric_limits<double>::infinity(),
                                     std::numeric_limits<double>::infinity(), 10, 1e-10);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("posterior predictive of the vacuous prior") {
  const StudentT t = posterior_predictive(vacuous_niw(2));
  CHECK(t.dof == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(t.center.norm() == 0.0);
  CHECK((t.shape - (2.0 / 3.0) * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("unit Cauchy density at the origin") {
  StudentT t{1.0, vec1(0.0), mat1(1.0)};
  CHECK(student_t_logpdf(t, vec1(0.0)) ==
        doctest::Approx(std::log(1.0 / std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("predictive requires positive degrees of freedom") {
  NiwParams bad{vec1(0.0), 1.0, 0.0, mat1(1.0)};  // nu - d + 1 = 0
  CHECK_THROWS(posterior_predictive(bad));
}

TEST_CASE("student t integrates to one") {
  using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
  const auto total = [&](double dof, double center, double shape) {
    StudentT t{dof, vec1(center), mat1(shape)};
    const auto f = [&](double x) { return std::exp(student_t_logpdf(t, vec1(x))); };
    return gk::integrate(f, -std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity(), 10, 1e-10);
  };
  CHECK(total(3.0, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total(5.0, 2.0, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("student t approaches the gaussian as dof grows") {
  StudentT t{1e6, vec1(0.0), mat1(1.0)};
  const double at = 1.0;  // one shape-standard-deviation from center
  const double g = gaussian_logpdf(vec1(at), vec1(0.0), mat1(1.0));
  CHECK(std::abs(student_t_logpdf(t, vec1(at)) - g) < 1e-4);
}

TEST_CASE("singular scale matrices are rejected") {
  Eigen::MatrixXd sing(2, 2);
  sing << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(check_spd(sing), NumericalDegeneracyError);
  Eigen::MatrixXd ok(2, 2);
  ok << 2.0, 0.3, 0.3, 1.0;
  CHECK_NOTHROW(check_spd(ok));
}
