// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gssbl/data.hpp"
#include "gssbl/micro_sbl.hpp"
#include "gssbl/propagation.hpp"

namespace gssbl {

// Lower clamp guarding the open end of the (0, 1] scale interval.
inline constexpr double kRhoFloor = 1e-9;

inline constexpr const char* kAlgoGsSbl = "gs_sbl";
inline constexpr const char* kAlgoOmp = "omp";
inline constexpr const char* kAlgoFspl = "fspl";

// Recovered sparse source model. `positions` holds the physical source
// locations: the voxel centers for grid-based algorithms, or an arbitrary
// base-station location (sentinel index -1) for the FSPL baseline.
struct SparseModel {
  std::string algorithm;                   // gs_sbl | omp | fspl
  std::vector<int> support;                // selected voxel indices, unique
  std::vector<Eigen::Vector3d> positions;  // source locations [m]
  std::vector<double> powers;              // source powers [W], all > 0
  double rho = 1.0;                        // global power scale in (0, 1]
  int n_sources_requested = 0;             // requested sparsity level
  VoxelGrid grid;
  PropagationConfig propagation;
  std::vector<std::string> flags;          // diagnostic markers

  bool empty() const noexcept { return support.empty(); }

  // Throws DataError on any invariant violation: unknown algorithm tag,
  // mismatched array lengths, duplicate or out-of-range support indices,
  // non-positive powers, rho outside (0, 1], |support| > n_sources_requested,
  // or an invalid grid/propagation block.
  void validate() const;
};

// Per-fit diagnostics.
struct FitReport {
  std::vector<double> residual_norm_per_stage;  // ||y_res|| entering each accepted stage, plus final (K+1 values, non-increasing)
  std::vector<double> selected_errors;          // winning candidate fit error per stage
  std::vector<int> candidates_evaluated;        // scored candidates per attempted stage
  double wall_time_s = 0.0;
  std::vector<std::string> flags;               // e.g. rho_clamped, early_stop_no_improvement
};

// Elementwise max(0, y - sum_j phi[:, support[j]] * powers[j]). An empty
// support returns y unchanged. Support indices must be valid columns.
Eigen::VectorXd deflate_residual(const Eigen::VectorXd& y_w, const std::vector<int>& support,
                                 const std::vector<double>& powers, const SensingMatrix& phi);

struct Selection {
  int index = -1;
  double power = 0.0;  // posterior mean of the winning candidate [W]
  double error = 0.0;  // its fit error [W^2]
};

// Scores every non-excluded candidate column (parallel scan, deterministic
// result) and returns the argmin of the fit error, ties broken by lowest
// index. Returns nullopt when the winner's posterior mean is <= 0 (nothing
// improves the residual). Throws NumericError when no selectable candidate
// exists at all. `excluded` is a mask of size phi.cols().
std::optional<Selection> select_next_source(const Eigen::VectorXd& y_res, const SensingMatrix& phi,
                                            const SblPriors& priors,
                                            const std::vector<char>& excluded,
                                            int* candidates_evaluated = nullptr);

// Closed-form scale rho_ls = (s^T y) / (s^T s) for s = sum_j phi_j p_j,
// clamped into (0, 1]: values above 1 clamp to 1, values <= 0 clamp to
// kRhoFloor; `clamped` reports whether either happened. Throws NumericError
// when the reconstruction has zero norm.
double refine_power_scale(const Eigen::VectorXd& y_w, const std::vector<int>& support,
                          const std::vector<double>& powers, const SensingMatrix& phi,
                          bool* clamped = nullptr);

// Greedy sequential fit: per stage, deflate the residual against the sources
// selected so far (non-negative clip), score all remaining candidates with
// the single-source loop, and append the argmin-error candidate with its
// posterior mean power. Stops early when no candidate improves the residual.
// The scalar refinement is applied once at the end against the original y.
// Deterministic for any thread count.
std::pair<SparseModel, FitReport> fit_gs_sbl(const MeasurementSet& measurements,
                                             const SensingMatrix& phi, int n_sources,
                                             const SblPriors& priors);

}  // namespace gssbl
