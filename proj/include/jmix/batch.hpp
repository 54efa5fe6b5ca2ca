#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace jmix {

/// N x n joint draws (one row per draw) plus provenance.
struct SampleBatch {
  Eigen::MatrixXd draws;
  std::uint64_t seed = 0;
  std::optional<double> joint_center;
  std::string coupling;
  std::string generator;
  /// Set for approximate couplings: the grid size and a bound on |row sum - center|.
  std::optional<int> grid_m;
  std::optional<double> sum_error_bound;
  /// Scalars drawn once per row and shared by every component.
  std::vector<std::string> shared;

  Eigen::Index rows() const { return draws.rows(); }
  Eigen::Index cols() const { return draws.cols(); }
  Eigen::VectorXd row_sums() const { return draws.rowwise().sum(); }
};

/// Matrix-variate draws: each draw is p x n, columns are the n vectors.
struct MatrixBatch {
  std::vector<Eigen::MatrixXd> draws;
  std::uint64_t seed = 0;
  std::string generator;
};

} // namespace jmix
