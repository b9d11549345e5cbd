#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "um/grid.hpp"
#include "um/rng.hpp"

using namespace um;

namespace {

RectilinearGrid box_grid(int g) {
  return make_uniform_grid(2, g, Eigen::Vector2d(-3.0, -3.0), Eigen::Vector2d(3.0, 3.0));
}

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

TEST_CASE("uniform grid construction") {
  const RectilinearGrid g2 = box_grid(2);
  CHECK(g2.dims() == 2);
  CHECK(g2.cell_count() == 4);
  REQUIRE(g2.hyperplanes[0].size() == 1);
  CHECK(g2.hyperplanes[0][0] == doctest::Approx(0.0));

  const RectilinearGrid g4 = box_grid(4);
  CHECK(g4.cell_count() == 16);
  REQUIRE(g4.hyperplanes[1].size() == 3);
  CHECK(g4.hyperplanes[1][0] == doctest::Approx(-1.5));
  CHECK(g4.hyperplanes[1][1] == doctest::Approx(0.0));
  CHECK(g4.hyperplanes[1][2] == doctest::Approx(1.5));

  CHECK_THROWS(make_uniform_grid(2, 1, Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1)));
  CHECK_THROWS(make_uniform_grid(2, 2, Eigen::Vector2d(1, 1), Eigen::Vector2d(-1, -1)));
}

TEST_CASE("flat indices at pinned points") {
  const RectilinearGrid g2 = box_grid(2);
  // boundary points belong to the upper cell
  CHECK(cell_of(g2, Eigen::Vector2d(0.0, 0.0)) == 3);
  CHECK(cell_of(g2, Eigen::Vector2d(-0.1, 0.1)) == 1);
  CHECK(cell_of(g2, Eigen::Vector2d(100.0, -100.0)) == 2);

  const RectilinearGrid g4 = box_grid(4);
  CHECK(cell_of(g4, Eigen::Vector2d(-5.0, 2.0)) == 3);
  CHECK(cell_of(g4, Eigen::Vector2d(-1.5, -1.5)) == 5);

  const auto multi = cell_multi_index(g4, Eigen::Vector2d(-5.0, 2.0));
  CHECK(multi[0] == 0);
  CHECK(multi[1] == 3);
}

TEST_CASE("histogram counts one point per quadrant") {
  const RectilinearGrid g2 = box_grid(2);
  std::vector<Eigen::VectorXd> pts = {Eigen::Vector2d(-1, -1), Eigen::Vector2d(-1, 1),
                                      Eigen::Vector2d(1, -1), Eigen::Vector2d(1, 1)};
  const Eigen::VectorXd h = histogram(g2, pts);
  REQUIRE(h.size() == 4);
  for (int c = 0; c < 4; ++c) CHECK(h[c] == 1.0);
}

TEST_CASE("standard normal quadrant masses are exactly a quarter") {
  const RectilinearGrid g2 = box_grid(2);
  const GaussianSpec std2{Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()};
  const Eigen::VectorXd p = cell_probabilities(g2, std2);
  REQUIRE(p.size() == 4);
  for (int c = 0; c < 4; ++c) CHECK(p[c] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("refining the grid preserves block masses") {
  const RectilinearGrid coarse = box_grid(2);
  const RectilinearGrid fine = box_grid(4);
  const MixtureSpec mix = quad_mixture(1.5, 0.12);
  const Eigen::VectorXd pc = cell_probabilities(coarse, mix);
  const Eigen::VectorXd pf = cell_probabilities(fine, mix);
  CHECK(pf.sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (int bi = 0; bi < 2; ++bi) {
    for (int bj = 0; bj < 2; ++bj) {
      double mass = 0.0;
      for (int i = 2 * bi; i < 2 * bi + 2; ++i) {
        for (int j = 2 * bj; j < 2 * bj + 2; ++j) mass += pf[i * 4 + j];
      }
      CHECK(mass == doctest::Approx(pc[bi * 2 + bj]).epsilon(1e-12));
    }
  }
}

TEST_CASE("sampled quadrant frequencies match the exact masses") {
  const RectilinearGrid g2 = box_grid(2);
  const MixtureSpec mix = quad_mixture(1.5, 0.12);
  const Eigen::VectorXd p = cell_probabilities(g2, mix);
  Sampler sampler(mix);
  RngStream rng(20240815);
  const int n = 100000;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(4);
  for (int s = 0; s < n; ++s) counts[cell_of(g2, sampler.sample_point(rng))] += 1.0;
  for (int c = 0; c < 4; ++c) {
    const double sigma = std::sqrt(n * p[c] * (1.0 - p[c]));
    CHECK(std::abs(counts[c] - n * p[c]) < 3.0 * sigma);
  }
}

TEST_CASE("two mixtures with equal coarse masses are indistinguishable at g=2") {
  const RectilinearGrid g2 = box_grid(2);
  const MixtureSpec tight = quad_mixture(1.5, 0.12);
  const MixtureSpec wide = quad_mixture(1.5, 0.25);
  const Eigen::VectorXd pt = cell_probabilities(g2, tight);
  const Eigen::VectorXd pw = cell_probabilities(g2, wide);
  CHECK((pt - pw).cwiseAbs().maxCoeff() < 1e-12);

  // a chi-square test of a sample from one against the other's masses
  // cannot tell them apart: statistic stays below the 0.001 critical value
  Sampler sampler(wide);
  RngStream rng(31337);
  const int n = 100000;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(4);
  for (int s = 0; s < n; ++s) counts[cell_of(g2, sampler.sample_point(rng))] += 1.0;
  double chi2 = 0.0;
  for (int c = 0; c < 4; ++c) {
    const double expect = n * pt[c];
    chi2 += (counts[c] - expect) * (counts[c] - expect) / expect;
  }
  CHECK(chi2 < 16.27);  // chi-square critical value, dof 3, alpha = 0.001
}

TEST_CASE("finer grids separate what the coarse grid cannot") {
  const RectilinearGrid g8 = make_uniform_grid(2, 8, Eigen::Vector2d(-3.0, -3.0),
                                               Eigen::Vector2d(3.0, 3.0));
  const Eigen::VectorXd pt = cell_probabilities(g8, quad_mixture(1.5, 0.12));
  const Eigen::VectorXd pw = cell_probabilities(g8, quad_mixture(1.5, 0.25));
  CHECK((pt - pw).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("cell probabilities reject unsupported specs") {
  const RectilinearGrid g2 = box_grid(2);
  Eigen::Matrix2d full;
  full << 1.0, 0.4, 0.4, 1.0;
  CHECK_THROWS(cell_probabilities(g2, GaussianSpec{Eigen::Vector2d::Zero(), full}));
  CHECK_THROWS(cell_probabilities(g2, MultinomialSpec{Eigen::Vector2d(0.5, 0.5)}));
  // dimension mismatch
  CHECK_THROWS(cell_probabilities(
      g2, GaussianSpec{Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity()}));
}

TEST_CASE("grid validation and json round trip") {
  RectilinearGrid bad;
  bad.hyperplanes = {{0.0, 0.0}, {1.0}};  // not strictly increasing
  CHECK_THROWS(validate_grid(bad));
  RectilinearGrid nan_grid;
  nan_grid.hyperplanes = {{std::nan("")}, {0.0}};
  CHECK_THROWS(validate_grid(nan_grid));

  const RectilinearGrid g4 = box_grid(4);
  nlohmann::json j;
  to_json(j, g4);
  RectilinearGrid back;
  from_json(j, back);
  CHECK(back.hyperplanes == g4.hyperplanes);
}
