// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <vector>

#include "gssbl/grid.hpp"

namespace gssbl {

inline constexpr double kSpeedOfLight = 299792458.0;  // [m/s]

// Near-field clamp: distances below this are clamped before gain evaluation
// wherever sample-to-voxel distances are formed (sensing matrix, prediction,
// synthetic generation). fspl_gain itself still rejects d <= 0.
inline constexpr double kMinDistance = 1.0;  // [m]

struct PropagationConfig {
  double frequency_hz = 3.5e9;  // carrier frequency
  double gain_tx = 1.0;         // transmit antenna gain, linear
  double gain_rx = 1.0;         // receive antenna gain, linear

  // lambda = c / frequency_hz [m]; validates first.
  double wavelength() const;

  // Throws UsageError unless frequency > 0 and gains are finite and >= 0.
  void validate() const;
};

// dbm_to_watts(x) = 10^((x - 30) / 10). Total.
double dbm_to_watts(double value_dbm);

// Inverse of dbm_to_watts; throws NumericError for value_w <= 0.
double watts_to_dbm(double value_w);

// Free-space gain Gt * Gr * (lambda / (4 pi d))^2.
// Throws NumericError for distance_m <= 0 (callers apply kMinDistance first).
double fspl_gain(const PropagationConfig& config, double distance_m);

// M x N matrix of free-space gains from every voxel center (column) to every
// sample point (row), with the grid and propagation settings it was built
// from. Immutable after build.
struct SensingMatrix {
  Eigen::MatrixXd values;        // linear power gains [W/W]
  Eigen::VectorXd column_norms;  // ||phi_j||_2 per column
  VoxelGrid grid;
  PropagationConfig propagation;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// values(i, j) = fspl_gain(max(kMinDistance, ||sample_i - voxel_center(j)||)).
// Requires at least one finite sample point. Row construction is parallel
// with bit-identical output for any thread count.
SensingMatrix build_sensing_matrix(const PropagationConfig& config, const VoxelGrid& grid,
                                   const std::vector<Eigen::Vector3d>& sample_points);

}  // namespace gssbl
