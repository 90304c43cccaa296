// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <vector>

#include "gssbl/gs_sbl.hpp"

namespace gssbl {

// Orthogonal matching pursuit baseline. Per stage: select the non-selected
// column maximizing |phi_j^T r| / ||phi_j|| (ties to the lowest index), solve
// the joint LS problem over the current support, and recompute the signed
// residual r = y - Phi_I p (no non-negative clip). rho is fixed at 1.
// Requires 1 <= n_sources <= N and M >= n_sources.
//
// Support entries whose final LS power is <= 0 are dropped from the returned
// model (flag omp_nonpositive_pruned) so the all-positive-powers invariant
// holds; the report reflects the uncensored iterations.
SparseModel fit_omp(const MeasurementSet& measurements, const SensingMatrix& phi, int n_sources,
                    FitReport* report = nullptr);

// Single fixed source at `source_location` (e.g. the physical base station);
// its power comes from the 1-D LS closed form without the (0, 1] clamp and
// rho is fixed at 1. A non-positive fitted power yields an empty model with
// flag empty_model; if every sample sits inside the near-field clamp radius
// the model is flagged degenerate_geometry.
SparseModel fit_fspl_baseline(const MeasurementSet& measurements,
                              const Eigen::Vector3d& source_location,
                              const PropagationConfig& config, FitReport* report = nullptr);

namespace detail {

// Joint LS powers over the support columns via column-pivoted QR. A rank-
// deficient block falls back to ridge-regularized normal equations with
// lambda = 1e-12 * trace(A^T A) / k (relative ridge; the columns carry
// Watt-scale norms) and sets *ridge_used.
Eigen::VectorXd solve_support_ls(const SensingMatrix& phi, const std::vector<int>& support,
                                 const Eigen::VectorXd& y, bool* ridge_used = nullptr);

}  // namespace detail
}  // namespace gssbl
