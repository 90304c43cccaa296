// SPDX-License-Identifier: Apache-2.0
#include "gssbl/kernels.hpp"

#include <atomic>
#include <limits>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gssbl {

namespace {

std::atomic<int> g_num_threads{0};  // 0 = library default

std::vector<Eigen::Vector3d> all_voxel_centers(const VoxelGrid& grid) {
  std::vector<Eigen::Vector3d> centers(static_cast<std::size_t>(grid.num_voxels()));
  for (int j = 0; j < grid.num_voxels(); ++j) {
    centers[static_cast<std::size_t>(j)] = voxel_center(grid, j);
  }
  return centers;
}

inline void fill_one_row(const PropagationConfig& config, const Eigen::Vector3d& point,
                         const std::vector<Eigen::Vector3d>& centers, Eigen::MatrixXd& out,
                         Eigen::Index row) {
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double d = (point - centers[static_cast<std::size_t>(j)]).norm();
    out(row, j) = fspl_gain(config, d < kMinDistance ? kMinDistance : d);
  }
}

inline void score_one(const SensingMatrix& phi, const Eigen::VectorXd& target,
                      const SblPriors& priors, const std::vector<char>& excluded,
                      std::vector<double>& mus, std::vector<double>& errors, Eigen::Index j) {
  const std::size_t sj = static_cast<std::size_t>(j);
  if (excluded[sj] || !(phi.column_norms[j] > 0.0)) {
    mus[sj] = 0.0;
    errors[sj] = std::numeric_limits<double>::infinity();
    return;
  }
  const CandidateScore s = score_candidate(phi.values.col(j), target, priors);
  mus[sj] = s.mu;
  errors[sj] = s.error;
}

inline void correlate_one(const SensingMatrix& phi, const Eigen::VectorXd& residual,
                          const std::vector<char>& excluded, std::vector<double>& scores,
                          Eigen::Index j) {
  const std::size_t sj = static_cast<std::size_t>(j);
  if (excluded[sj] || !(phi.column_norms[j] > 0.0)) {
    scores[sj] = -std::numeric_limits<double>::infinity();
    return;
  }
  scores[sj] = std::abs(phi.values.col(j).dot(residual)) / phi.column_norms[j];
}

}  // namespace

void set_num_threads(int n) { g_num_threads.store(n > 0 ? n : 0); }

int num_threads() {
  const int n = g_num_threads.load();
  if (n > 0) {
    return n;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
#endif
}

namespace kernels {

void fill_sensing_rows_serial(const PropagationConfig& config, const VoxelGrid& grid,
                              const std::vector<Eigen::Vector3d>& points, Eigen::MatrixXd& out) {
  const std::vector<Eigen::Vector3d> centers = all_voxel_centers(grid);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    fill_one_row(config, points[static_cast<std::size_t>(i)], centers, out, i);
  }
}

void fill_sensing_rows_parallel(const PropagationConfig& config, const VoxelGrid& grid,
                                const std::vector<Eigen::Vector3d>& points, Eigen::MatrixXd& out) {
  const std::vector<Eigen::Vector3d> centers = all_voxel_centers(grid);
  const long long rows = out.rows();
#ifdef _OPENMP
#pragma omp parallel for num_threads(num_threads()) schedule(static)
#endif
  for (long long i = 0; i < rows; ++i) {
    fill_one_row(config, points[static_cast<std::size_t>(i)], centers, out, i);
  }
}

void score_candidates_serial(const SensingMatrix& phi, const Eigen::VectorXd& target,
                             const SblPriors& priors, const std::vector<char>& excluded,
                             std::vector<double>& mus, std::vector<double>& errors) {
  for (Eigen::Index j = 0; j < phi.cols(); ++j) {
    score_one(phi, target, priors, excluded, mus, errors, j);
  }
}

void score_candidates_parallel(const SensingMatrix& phi, const Eigen::VectorXd& target,
                               const SblPriors& priors, const std::vector<char>& excluded,
                               std::vector<double>& mus, std::vector<double>& errors) {
  const long long cols = phi.cols();
#ifdef _OPENMP
#pragma omp parallel for num_threads(num_threads()) schedule(static)
#endif
  for (long long j = 0; j < cols; ++j) {
    score_one(phi, target, priors, excluded, mus, errors, j);
  }
}

void correlation_scan_serial(const SensingMatrix& phi, const Eigen::VectorXd& residual,
                             const std::vector<char>& excluded, std::vector<double>& scores) {
  for (Eigen::Index j = 0; j < phi.cols(); ++j) {
    correlate_one(phi, residual, excluded, scores, j);
  }
}

void correlation_scan_parallel(const SensingMatrix& phi, const Eigen::VectorXd& residual,
                               const std::vector<char>& excluded, std::vector<double>& scores) {
  const long long cols = phi.cols();
#ifdef _OPENMP
#pragma omp parallel for num_threads(num_threads()) schedule(static)
#endif
  for (long long j = 0; j < cols; ++j) {
    correlate_one(phi, residual, excluded, scores, j);
  }
}

}  // namespace kernels
}  // namespace gssbl
