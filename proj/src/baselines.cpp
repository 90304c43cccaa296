// SPDX-License-Identifier: Apache-2.0
#include "gssbl/baselines.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <limits>

#include "gssbl/kernels.hpp"

namespace gssbl {

namespace detail {

Eigen::VectorXd solve_support_ls(const SensingMatrix& phi, const std::vector<int>& support,
                                 const Eigen::VectorXd& y, bool* ridge_used) {
  const Eigen::Index k = static_cast<Eigen::Index>(support.size());
  if (k < 1) {
    throw NumericError("solve_support_ls: empty support");
  }
  Eigen::MatrixXd block(phi.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const int idx = support[static_cast<std::size_t>(j)];
    if (idx < 0 || idx >= phi.cols()) {
      throw NumericError("solve_support_ls: support index out of range");
    }
    block.col(j) = phi.values.col(idx);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(block);
  if (qr.rank() == k) {
    if (ridge_used != nullptr) {
      *ridge_used = false;
    }
    return qr.solve(y);
  }

  // Rank-deficient block: ridge-regularized normal equations. The ridge is
  // relative to the Gram trace because the columns carry Watt-scale norms.
  Eigen::MatrixXd gram = block.transpose() * block;
  const double lambda = 1e-12 * gram.trace() / static_cast<double>(k);
  gram.diagonal().array() += lambda;
  if (ridge_used != nullptr) {
    *ridge_used = true;
  }
  return gram.ldlt().solve(block.transpose() * y);
}

}  // namespace detail

SparseModel fit_omp(const MeasurementSet& measurements, const SensingMatrix& phi, int n_sources,
                    FitReport* report) {
  const auto t_start = std::chrono::steady_clock::now();
  measurements.validate();
  if (measurements.rss_w.size() != phi.rows()) {
    throw NumericError("fit_omp: measurement/matrix dimension mismatch");
  }
  if (n_sources < 1 || n_sources > phi.cols()) {
    throw UsageError("fit_omp: n_sources must lie in [1, N]");
  }
  if (phi.rows() < n_sources) {
    throw UsageError("fit_omp: needs at least n_sources measurements");
  }

  const Eigen::VectorXd& y = measurements.rss_w;
  const std::size_t n = static_cast<std::size_t>(phi.cols());
  std::vector<char> excluded(n, 0);
  std::vector<int> support;
  Eigen::VectorXd ls_powers;
  Eigen::VectorXd residual = y;
  bool any_ridge = false;

  FitReport local;
  local.residual_norm_per_stage.push_back(residual.norm());

  std::vector<double> scores(n);
  for (int stage = 0; stage < n_sources; ++stage) {
    kernels::correlation_scan_parallel(phi, residual, excluded, scores);

    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    int evaluated = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (excluded[j] || !(phi.column_norms[static_cast<Eigen::Index>(j)] > 0.0)) {
        continue;
      }
      ++evaluated;
      if (scores[j] > best_score) {  // strict > keeps the lowest index on ties
        best_score = scores[j];
        best = static_cast<int>(j);
      }
    }
    if (best < 0) {
      throw NumericError("fit_omp: no selectable candidate column");
    }

    support.push_back(best);
    excluded[static_cast<std::size_t>(best)] = 1;
    bool ridge = false;
    ls_powers = detail::solve_support_ls(phi, support, y, &ridge);
    any_ridge = any_ridge || ridge;

    Eigen::VectorXd reconstruction = Eigen::VectorXd::Zero(phi.rows());
    for (std::size_t j = 0; j < support.size(); ++j) {
      reconstruction.noalias() += ls_powers[static_cast<Eigen::Index>(j)] * phi.values.col(support[j]);
    }
    residual = y - reconstruction;

    local.residual_norm_per_stage.push_back(residual.norm());
    local.selected_errors.push_back(best_score);
    local.candidates_evaluated.push_back(evaluated);

    // Once the selected columns span y the residual is pure rounding noise;
    // another stage would fit that noise and break the strict decrease of
    // the residual norms. The threshold is relative: rss_w is Watt-scale.
    if (residual.norm() <= 1e-13 * y.norm()) {
      if (stage + 1 < n_sources) {
        local.flags.push_back("exact_fit_early_stop");
      }
      break;
    }
  }
  if (any_ridge) {
    local.flags.push_back("omp_ridge_ls");
  }

  SparseModel model;
  model.algorithm = kAlgoOmp;
  model.rho = 1.0;
  model.n_sources_requested = n_sources;
  model.grid = phi.grid;
  model.propagation = phi.propagation;
  bool pruned = false;
  for (std::size_t j = 0; j < support.size(); ++j) {
    const double p = ls_powers[static_cast<Eigen::Index>(j)];
    if (p > 0.0) {
      model.support.push_back(support[j]);
      model.positions.push_back(voxel_center(phi.grid, support[j]));
      model.powers.push_back(p);
    } else {
      pruned = true;
    }
  }
  if (pruned) {
    model.flags.push_back("omp_nonpositive_pruned");
    local.flags.push_back("omp_nonpositive_pruned");
  }

  local.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (report != nullptr) {
    *report = std::move(local);
  }
  return model;
}

SparseModel fit_fspl_baseline(const MeasurementSet& measurements,
                              const Eigen::Vector3d& source_location,
                              const PropagationConfig& config, FitReport* report) {
  const auto t_start = std::chrono::steady_clock::now();
  measurements.validate();
  config.validate();
  if (!source_location.allFinite()) {
    throw UsageError("fit_fspl_baseline: source location must be finite");
  }

  const Eigen::Index m = measurements.rss_w.size();
  Eigen::VectorXd column(m);
  Eigen::Index clamped_count = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = (measurements.points[static_cast<std::size_t>(i)] - source_location).norm();
    if (d < kMinDistance) {
      ++clamped_count;
    }
    column[i] = fspl_gain(config, d < kMinDistance ? kMinDistance : d);
  }

  // 1-D LS power, same closed form as the scale refinement but unclamped.
  const double power = column.dot(measurements.rss_w) / column.squaredNorm();

  SparseModel model;
  model.algorithm = kAlgoFspl;
  model.rho = 1.0;
  model.n_sources_requested = 1;
  model.propagation = config;
  if (power > 0.0) {
    model.support.push_back(-1);  // off-grid source
    model.positions.push_back(source_location);
    model.powers.push_back(power);
  } else {
    model.flags.push_back("empty_model");
  }
  if (clamped_count == m) {
    model.flags.push_back("degenerate_geometry");
  }

  FitReport local;
  local.residual_norm_per_stage.push_back(measurements.rss_w.norm());
  const Eigen::VectorXd residual = measurements.rss_w - std::max(power, 0.0) * column;
  local.residual_norm_per_stage.push_back(residual.norm());
  local.selected_errors.push_back(residual.squaredNorm());
  local.candidates_evaluated.push_back(1);
  local.flags = model.flags;
  local.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (report != nullptr) {
    *report = std::move(local);
  }
  return model;
}

}  // namespace gssbl
