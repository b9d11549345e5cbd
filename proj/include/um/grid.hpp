#pragma once

#include <Eigen/Dense>
#include <vector>

#include "um/ground_truth.hpp"

#include <nlohmann/json_fwd.hpp>

namespace um {

/**
 * Rectilinear partition of R^d: each dimension carries a strictly
 * increasing list of hyperplane offsets that slice the axis into
 * half-open cells [c_k, c_{k+1}); the outermost cells extend to infinity,
 * so every finite point lands in exactly one cell.  Flat cell indices are
 * row-major with the first dimension varying slowest.
 */
struct RectilinearGrid {
  std::vector<std::vector<double>> hyperplanes;

  int dims() const { return static_cast<int>(hyperplanes.size()); }
  int cells_in_dim(int h) const { return static_cast<int>(hyperplanes[h].size()) + 1; }
  int cell_count() const;
};

void validate_grid(const RectilinearGrid& grid);

// Uniform grid with g cells per dimension over the box [lo, hi]: the g-1
// hyperplanes split each axis evenly; cells beyond the box are the
// unbounded outer slabs.
RectilinearGrid make_uniform_grid(int dims, int g, const Eigen::VectorXd& lo,
                                  const Eigen::VectorXd& hi);

// Per-dimension cell index of x: the number of hyperplanes at or below the
// coordinate, so a point on a hyperplane belongs to the upper cell.
std::vector<int> cell_multi_index(const RectilinearGrid& grid, const Eigen::VectorXd& x);

// Flat row-major cell index.
int cell_of(const RectilinearGrid& grid, const Eigen::VectorXd& x);

// Cell counts of a batch of points.
Eigen::VectorXd histogram(const RectilinearGrid& grid,
                          const std::vector<Eigen::VectorXd>& points);

// Exact cell masses of a Gaussian or mixture spec with diagonal
// covariances (products of one-dimensional normal CDF differences).
// Non-diagonal covariances are rejected.
Eigen::VectorXd cell_probabilities(const RectilinearGrid& grid, const DistributionSpec& spec);

void to_json(nlohmann::json& j, const RectilinearGrid& grid);
void from_json(const nlohmann::json& j, RectilinearGrid& grid);

}  // namespace um
