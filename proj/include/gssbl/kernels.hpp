// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <vector>

#include "gssbl/micro_sbl.hpp"
#include "gssbl/propagation.hpp"

namespace gssbl {

// Worker-thread count used by the parallel kernels. n <= 0 restores the
// default (all hardware threads). Thread-safe.
void set_num_threads(int n);
int num_threads();

namespace kernels {

// The hot loops, each in a serial reference version and an OpenMP version.
// Every parallel kernel writes disjoint, preallocated slots and performs the
// same per-element arithmetic as its serial twin, so outputs are bit-identical
// for any thread count; reductions (argmin/argmax) happen serially afterwards.

// out(i, j) = fspl_gain(max(kMinDistance, ||points[i] - voxel_center(j)||)).
// `out` must be presized to points.size() x grid.num_voxels().
void fill_sensing_rows_serial(const PropagationConfig& config, const VoxelGrid& grid,
                              const std::vector<Eigen::Vector3d>& points, Eigen::MatrixXd& out);
void fill_sensing_rows_parallel(const PropagationConfig& config, const VoxelGrid& grid,
                                const std::vector<Eigen::Vector3d>& points, Eigen::MatrixXd& out);

// Scores every candidate column against `target` via score_candidate.
// Excluded or zero-norm columns receive mu = 0 and error = +inf so they can
// never win. `mus` and `errors` must be presized to phi.cols().
void score_candidates_serial(const SensingMatrix& phi, const Eigen::VectorXd& target,
                             const SblPriors& priors, const std::vector<char>& excluded,
                             std::vector<double>& mus, std::vector<double>& errors);
void score_candidates_parallel(const SensingMatrix& phi, const Eigen::VectorXd& target,
                               const SblPriors& priors, const std::vector<char>& excluded,
                               std::vector<double>& mus, std::vector<double>& errors);

// scores[j] = |phi_j^T residual| / ||phi_j|| for selectable columns, -inf for
// excluded or zero-norm columns. `scores` must be presized to phi.cols().
void correlation_scan_serial(const SensingMatrix& phi, const Eigen::VectorXd& residual,
                             const std::vector<char>& excluded, std::vector<double>& scores);
void correlation_scan_parallel(const SensingMatrix& phi, const Eigen::VectorXd& residual,
                               const std::vector<char>& excluded, std::vector<double>& scores);

}  // namespace kernels
}  // namespace gssbl
