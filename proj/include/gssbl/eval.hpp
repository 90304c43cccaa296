// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "gssbl/baselines.hpp"
#include "gssbl/data.hpp"
#include "gssbl/gs_sbl.hpp"

namespace gssbl {

// One evaluation cell: an algorithm fitted on a training split and scored on
// a test split (or, for the sweep, one sparsity level on one test split).
struct EvalResult {
  std::string algorithm;
  int n_sbl = 0;
  double separation_m = 0.0;  // |train z - test z| (sweep rows: min over pairs)
  std::uint64_t seed = 0;     // stamped by the experiment driver
  double rmse_db = 0.0;
  int n_test = 0;
  Eigen::VectorXd per_point_error_db;  // predicted - measured [dB] (empty for pair-averaged rows)
  std::vector<double> train_z;
  std::vector<double> test_z;
};

// Predicted RSS [dBm] at each point: watts_to_dbm(rho * sum_j p_j * gain_j)
// with the near-field clamp. Throws NumericError for an empty model.
Eigen::VectorXd predict(const SparseModel& model, const std::vector<Eigen::Vector3d>& points);

// Root of the mean squared dB difference. Vectors must be equal-length and
// non-empty.
double rmse_db(const Eigen::VectorXd& predicted_dbm, const Eigen::VectorXd& measured_dbm);

// Fits the greedy sequential model on `train` once per sparsity level in
// [n_min, n_max] and scores it on every test split. One row per
// (n_sbl, test split); separation_m is the smallest altitude distance
// between the test split and any training altitude.
std::vector<EvalResult> run_nsbl_sweep(const MeasurementSet& train,
                                       const std::vector<MeasurementSet>& tests,
                                       const VoxelGrid& grid, const PropagationConfig& config,
                                       int n_min, int n_max, const SblPriors& priors);

// For each separation s and algorithm: pairs every training altitude z with
// every test altitude z +- s present in `altitudes` (s = 0 pairs each
// altitude with itself, i.e. evaluation on the training set), fits on the
// training split, scores on the test split, and emits one row per
// (algorithm, separation) with the RMSE averaged over all valid pairs and
// n_test summed. Fits are computed per training altitude (cached across
// separations; the fit is a pure function of the split). Algorithms are the
// model tags {gs_sbl, omp, fspl}; fspl uses `bs_location` and rows carry
// n_sbl = 1. Throws UsageError when a separation has no valid pair or an
// algorithm tag is unknown.
std::vector<EvalResult> run_separation_comparison(
    const MeasurementSet& data, const std::vector<double>& altitudes,
    const std::vector<double>& separations, const std::vector<std::string>& algorithms,
    const VoxelGrid& grid, const PropagationConfig& config, const SblPriors& priors,
    int n_sources, const Eigen::Vector3d& bs_location, double altitude_tolerance_m = 1.0);

}  // namespace gssbl
