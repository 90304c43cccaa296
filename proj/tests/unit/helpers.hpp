// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <vector>

#include "gssbl/data.hpp"
#include "gssbl/propagation.hpp"

namespace testutil {

// Sensing matrix with hand-picked entries over an N x 1 x 1 unit grid. The
// grid and propagation blocks are valid (so model assembly and validation
// work) but the matrix values are exactly the given ones, which lets tests
// drive the solvers with known numbers.
inline gssbl::SensingMatrix hand_matrix(const Eigen::MatrixXd& values) {
  gssbl::SensingMatrix phi;
  phi.grid.origin = Eigen::Vector3d(0.0, 0.0, 0.0);
  phi.grid.cell_size = Eigen::Vector3d(1.0, 1.0, 1.0);
  phi.grid.counts = {static_cast<int>(values.cols()), 1, 1};
  phi.values = values;
  phi.column_norms = values.colwise().norm();
  return phi;
}

// Measurement set with the given Watt values at arbitrary distinct points.
inline gssbl::MeasurementSet ms_from_watts(const Eigen::VectorXd& rss_w) {
  std::vector<Eigen::Vector3d> points(static_cast<std::size_t>(rss_w.size()));
  for (Eigen::Index i = 0; i < rss_w.size(); ++i) {
    points[static_cast<std::size_t>(i)] = Eigen::Vector3d(static_cast<double>(i), 0.0, 30.0);
  }
  return gssbl::make_measurement_set(std::move(points), rss_w);
}

}  // namespace testutil
