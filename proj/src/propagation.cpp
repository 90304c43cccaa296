// SPDX-License-Identifier: Apache-2.0
#include "gssbl/propagation.hpp"

#include <cmath>
#include <numbers>

#include "gssbl/kernels.hpp"

namespace gssbl {

void PropagationConfig::validate() const {
  if (!std::isfinite(frequency_hz) || !(frequency_hz > 0.0)) {
    throw UsageError("propagation frequency_hz must be strictly positive");
  }
  if (!std::isfinite(gain_tx) || gain_tx < 0.0 || !std::isfinite(gain_rx) || gain_rx < 0.0) {
    throw UsageError("propagation antenna gains must be finite and >= 0");
  }
}

double PropagationConfig::wavelength() const {
  validate();
  return kSpeedOfLight / frequency_hz;
}

double dbm_to_watts(double value_dbm) { return std::pow(10.0, (value_dbm - 30.0) / 10.0); }

double watts_to_dbm(double value_w) {
  if (!(value_w > 0.0)) {
    throw NumericError("watts_to_dbm requires a strictly positive power");
  }
  return 10.0 * std::log10(value_w) + 30.0;
}

double fspl_gain(const PropagationConfig& config, double distance_m) {
  if (!(distance_m > 0.0)) {
    throw NumericError("fspl_gain requires distance > 0");
  }
  const double amplitude = config.wavelength() / (4.0 * std::numbers::pi * distance_m);
  return config.gain_tx * config.gain_rx * amplitude * amplitude;
}

SensingMatrix build_sensing_matrix(const PropagationConfig& config, const VoxelGrid& grid,
                                   const std::vector<Eigen::Vector3d>& sample_points) {
  config.validate();
  grid.validate();
  if (sample_points.empty()) {
    throw NumericError("build_sensing_matrix requires at least one sample point");
  }
  for (const Eigen::Vector3d& p : sample_points) {
    if (!p.allFinite()) {
      throw NumericError("build_sensing_matrix requires finite sample points");
    }
  }

  SensingMatrix phi;
  phi.grid = grid;
  phi.propagation = config;
  phi.values.resize(static_cast<Eigen::Index>(sample_points.size()), grid.num_voxels());
  kernels::fill_sensing_rows_parallel(config, grid, sample_points, phi.values);
  phi.column_norms = phi.values.colwise().norm();
  return phi;
}

}  // namespace gssbl
