// SPDX-License-Identifier: Apache-2.0
#include "gssbl/gs_sbl.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "gssbl/kernels.hpp"

namespace gssbl {

void SparseModel::validate() const {
  if (algorithm != kAlgoGsSbl && algorithm != kAlgoOmp && algorithm != kAlgoFspl) {
    throw DataError("model: unknown algorithm tag '" + algorithm + "'");
  }
  grid.validate();
  propagation.validate();
  const std::size_t k = support.size();
  if (positions.size() != k || powers.size() != k) {
    throw DataError("model: support/positions/powers length mismatch");
  }
  if (!(rho > 0.0) || !(rho <= 1.0)) {
    throw DataError("model: rho must lie in (0, 1]");
  }
  if (n_sources_requested < static_cast<int>(k)) {
    throw DataError("model: support exceeds the requested source count");
  }
  std::set<int> seen;
  for (std::size_t j = 0; j < k; ++j) {
    const int idx = support[j];
    if (idx < -1 || idx >= grid.num_voxels()) {
      throw DataError("model: support index out of range: " + std::to_string(idx));
    }
    if (idx >= 0 && !seen.insert(idx).second) {
      throw DataError("model: duplicate support index: " + std::to_string(idx));
    }
    if (idx == -1 && algorithm != kAlgoFspl) {
      throw DataError("model: off-grid source in a grid-based model");
    }
    if (!std::isfinite(powers[j]) || !(powers[j] > 0.0)) {
      throw DataError("model: source powers must be strictly positive");
    }
    if (!positions[j].allFinite()) {
      throw DataError("model: source positions must be finite");
    }
  }
  if (algorithm == kAlgoFspl && k > 1) {
    throw DataError("model: the FSPL baseline carries at most one source");
  }
}

Eigen::VectorXd deflate_residual(const Eigen::VectorXd& y_w, const std::vector<int>& support,
                                 const std::vector<double>& powers, const SensingMatrix& phi) {
  if (support.size() != powers.size()) {
    throw NumericError("deflate_residual: support/powers length mismatch");
  }
  if (y_w.size() != phi.rows()) {
    throw NumericError("deflate_residual: measurement/matrix dimension mismatch");
  }
  Eigen::VectorXd residual = y_w;
  for (std::size_t j = 0; j < support.size(); ++j) {
    const int idx = support[j];
    if (idx < 0 || idx >= phi.cols()) {
      throw NumericError("deflate_residual: support index out of range");
    }
    residual.noalias() -= powers[j] * phi.values.col(idx);
  }
  return residual.cwiseMax(0.0);
}

std::optional<Selection> select_next_source(const Eigen::VectorXd& y_res, const SensingMatrix& phi,
                                            const SblPriors& priors,
                                            const std::vector<char>& excluded,
                                            int* candidates_evaluated) {
  if (y_res.size() != phi.rows()) {
    throw NumericError("select_next_source: residual/matrix dimension mismatch");
  }
  if (excluded.size() != static_cast<std::size_t>(phi.cols())) {
    throw NumericError("select_next_source: exclusion mask size mismatch");
  }

  const std::size_t n = static_cast<std::size_t>(phi.cols());
  std::vector<double> mus(n);
  std::vector<double> errors(n);
  kernels::score_candidates_parallel(phi, y_res, priors, excluded, mus, errors);

  // Serial index-ordered reduction: deterministic for any thread count, and
  // the strict < keeps the lowest index on ties.
  int best = -1;
  double best_error = std::numeric_limits<double>::infinity();
  int evaluated = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (excluded[j] || !(phi.column_norms[static_cast<Eigen::Index>(j)] > 0.0)) {
      continue;
    }
    ++evaluated;
    if (errors[j] < best_error) {
      best_error = errors[j];
      best = static_cast<int>(j);
    }
  }
  if (candidates_evaluated != nullptr) {
    *candidates_evaluated = evaluated;
  }
  if (best < 0) {
    throw NumericError("select_next_source: no selectable candidate column");
  }
  if (!(mus[static_cast<std::size_t>(best)] > 0.0)) {
    return std::nullopt;  // nothing improves the residual
  }
  Selection sel;
  sel.index = best;
  sel.power = mus[static_cast<std::size_t>(best)];
  sel.error = errors[static_cast<std::size_t>(best)];
  return sel;
}

double refine_power_scale(const Eigen::VectorXd& y_w, const std::vector<int>& support,
                          const std::vector<double>& powers, const SensingMatrix& phi,
                          bool* clamped) {
  if (support.empty() || support.size() != powers.size()) {
    throw NumericError("refine_power_scale: empty or inconsistent model");
  }
  if (y_w.size() != phi.rows()) {
    throw NumericError("refine_power_scale: measurement/matrix dimension mismatch");
  }
  Eigen::VectorXd reconstruction = Eigen::VectorXd::Zero(phi.rows());
  for (std::size_t j = 0; j < support.size(); ++j) {
    const int idx = support[j];
    if (idx < 0 || idx >= phi.cols()) {
      throw NumericError("refine_power_scale: support index out of range");
    }
    reconstruction.noalias() += powers[j] * phi.values.col(idx);
  }
  const double ss = reconstruction.squaredNorm();
  if (!(ss > 0.0)) {
    throw NumericError("refine_power_scale: degenerate zero-norm reconstruction");
  }

  const double rho_ls = reconstruction.dot(y_w) / ss;
  bool did_clamp = false;
  double rho = rho_ls;
  if (rho > 1.0) {
    rho = 1.0;
    did_clamp = true;
  } else if (!(rho > 0.0)) {  // also catches NaN defensively
    rho = kRhoFloor;
    did_clamp = true;
  }
  if (clamped != nullptr) {
    *clamped = did_clamp;
  }
  return rho;
}

std::pair<SparseModel, FitReport> fit_gs_sbl(const MeasurementSet& measurements,
                                             const SensingMatrix& phi, int n_sources,
                                             const SblPriors& priors) {
  const auto t_start = std::chrono::steady_clock::now();
  measurements.validate();
  priors.validate();
  if (measurements.rss_w.size() != phi.rows()) {
    throw NumericError("fit_gs_sbl: measurement/matrix dimension mismatch");
  }
  if (n_sources < 1 || n_sources > phi.cols()) {
    throw UsageError("fit_gs_sbl: n_sources must lie in [1, N]");
  }

  const Eigen::VectorXd& y = measurements.rss_w;
  const std::size_t n = static_cast<std::size_t>(phi.cols());
  std::vector<char> excluded(n, 0);
  std::vector<int> support;
  std::vector<double> powers;
  FitReport report;

  for (int stage = 0; stage < n_sources; ++stage) {
    const Eigen::VectorXd y_res = deflate_residual(y, support, powers, phi);
    int evaluated = 0;
    const std::optional<Selection> sel = select_next_source(y_res, phi, priors, excluded, &evaluated);
    report.candidates_evaluated.push_back(evaluated);
    if (!sel.has_value()) {
      report.flags.push_back("early_stop_no_improvement");
      break;
    }
    report.residual_norm_per_stage.push_back(y_res.norm());
    report.selected_errors.push_back(sel->error);
    support.push_back(sel->index);
    powers.push_back(sel->power);
    excluded[static_cast<std::size_t>(sel->index)] = 1;
  }
  report.residual_norm_per_stage.push_back(deflate_residual(y, support, powers, phi).norm());

  SparseModel model;
  model.algorithm = kAlgoGsSbl;
  model.support = support;
  model.powers = powers;
  model.positions.reserve(support.size());
  for (const int idx : support) {
    model.positions.push_back(voxel_center(phi.grid, idx));
  }
  model.n_sources_requested = n_sources;
  model.grid = phi.grid;
  model.propagation = phi.propagation;
  if (!support.empty()) {
    bool clamped = false;
    model.rho = refine_power_scale(y, support, powers, phi, &clamped);
    if (clamped) {
      report.flags.push_back("rho_clamped");
    }
  }

  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(model), std::move(report)};
}

}  // namespace gssbl
