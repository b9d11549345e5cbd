#include "um/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "um/math_util.hpp"

namespace um {

int RectilinearGrid::cell_count() const {
  int total = 1;
  for (int h = 0; h < dims(); ++h) total *= cells_in_dim(h);
  return total;
}

void validate_grid(const RectilinearGrid& grid) {
  if (grid.hyperplanes.empty()) {
    throw std::invalid_argument("grid: no dimensions");
  }
  for (const auto& planes : grid.hyperplanes) {
    if (planes.empty()) {
      throw std::invalid_argument("grid: each dimension needs at least one hyperplane");
    }
    for (std::size_t k = 0; k < planes.size(); ++k) {
      if (!std::isfinite(planes[k])) {
        throw std::invalid_argument("grid: hyperplane offsets must be finite");
      }
      if (k > 0 && planes[k] <= planes[k - 1]) {
        throw std::invalid_argument("grid: hyperplanes must be strictly increasing");
      }
    }
  }
}

RectilinearGrid make_uniform_grid(int dims, int g, const Eigen::VectorXd& lo,
                                  const Eigen::VectorXd& hi) {
  if (dims < 1 || g < 2) {
    throw std::invalid_argument("make_uniform_grid: need dims >= 1 and g >= 2");
  }
  if (lo.size() != dims || hi.size() != dims) {
    throw std::invalid_argument("make_uniform_grid: box bounds length mismatch");
  }
  RectilinearGrid grid;
  grid.hyperplanes.resize(dims);
  for (int h = 0; h < dims; ++h) {
    if (!(lo[h] < hi[h])) {
      throw std::invalid_argument("make_uniform_grid: box must have positive extent");
    }
    for (int k = 1; k < g; ++k) {
      grid.hyperplanes[h].push_back(lo[h] + (hi[h] - lo[h]) * k / g);
    }
  }
  validate_grid(grid);
  return grid;
}

std::vector<int> cell_multi_index(const RectilinearGrid& grid, const Eigen::VectorXd& x) {
  if (x.size() != grid.dims()) {
    throw std::invalid_argument("cell_multi_index: point dimension mismatch");
  }
  std::vector<int> idx(grid.dims());
  for (int h = 0; h < grid.dims(); ++h) {
    if (std::isnan(x[h])) {
      throw std::invalid_argument("cell_multi_index: NaN coordinate");
    }
    const auto& planes = grid.hyperplanes[h];
    idx[h] = static_cast<int>(std::upper_bound(planes.begin(), planes.end(), x[h]) -
                              planes.begin());
  }
  return idx;
}

int cell_of(const RectilinearGrid& grid, const Eigen::VectorXd& x) {
  const std::vector<int> idx = cell_multi_index(grid, x);
  int flat = 0;
  for (int h = 0; h < grid.dims(); ++h) {
    flat = flat * grid.cells_in_dim(h) + idx[h];
  }
  return flat;
}

Eigen::VectorXd histogram(const RectilinearGrid& grid,
                          const std::vector<Eigen::VectorXd>& points) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(grid.cell_count());
  for (const auto& p : points) {
    counts[cell_of(grid, p)] += 1.0;
  }
  return counts;
}

namespace {

void require_diagonal(const Eigen::MatrixXd& cov) {
  const Eigen::MatrixXd off = cov - cov.diagonal().asDiagonal().toDenseMatrix();
  if (off.cwiseAbs().maxCoeff() > 0.0) {
    throw std::invalid_argument(
        "cell_probabilities: only diagonal covariances have closed-form cell masses");
  }
}

// Mass the component places on each slab of one axis.
std::vector<double> axis_masses(const std::vector<double>& planes, double mean, double sd) {
  std::vector<double> masses;
  double below = 0.0;
  for (const double c : planes) {
    const double cdf = normal_cdf((c - mean) / sd);
    masses.push_back(cdf - below);
    below = cdf;
  }
  masses.push_back(1.0 - below);
  return masses;
}

void add_component_mass(const RectilinearGrid& grid, double weight,
                        const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                        Eigen::VectorXd& out) {
  require_diagonal(cov);
  const int d = grid.dims();
  std::vector<std::vector<double>> axes(d);
  for (int h = 0; h < d; ++h) {
    axes[h] = axis_masses(grid.hyperplanes[h], mean[h], std::sqrt(cov(h, h)));
  }
  const int total = grid.cell_count();
  for (int flat = 0; flat < total; ++flat) {
    double mass = weight;
    int rem = flat;
    for (int h = d - 1; h >= 0; --h) {
      const int cells = grid.cells_in_dim(h);
      mass *= axes[h][rem % cells];
      rem /= cells;
    }
    out[flat] += mass;
  }
}

}  // namespace

Eigen::VectorXd cell_probabilities(const RectilinearGrid& grid, const DistributionSpec& spec) {
  validate_grid(grid);
  if (!std::holds_alternative<MultinomialSpec>(spec) && dimension_of(spec) != grid.dims()) {
    throw std::invalid_argument("cell_probabilities: spec dimension does not match the grid");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.cell_count());
  if (const auto* g = std::get_if<GaussianSpec>(&spec)) {
    add_component_mass(grid, 1.0, g->mean, g->cov, out);
  } else if (const auto* m = std::get_if<MixtureSpec>(&spec)) {
    for (const auto& c : m->components) {
      add_component_mass(grid, c.weight, c.mean, c.cov, out);
    }
  } else {
    throw std::invalid_argument("cell_probabilities: categorical spec cannot be gridded");
  }
  return out;
}

void to_json(nlohmann::json& j, const RectilinearGrid& grid) {
  j = {{"dims", grid.dims()}, {"hyperplanes", grid.hyperplanes}};
}

void from_json(const nlohmann::json& j, RectilinearGrid& grid) {
  grid.hyperplanes = j.at("hyperplanes").get<std::vector<std::vector<double>>>();
  if (j.contains("dims") && j.at("dims").get<int>() != grid.dims()) {
    throw std::invalid_argument("grid: dims field disagrees with hyperplane list");
  }
  validate_grid(grid);
}

}  // namespace um
