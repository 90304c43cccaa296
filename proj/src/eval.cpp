// SPDX-License-Identifier: Apache-2.0
#include "gssbl/eval.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>

namespace gssbl {
namespace {

// Smallest |train - test| altitude distance; 0 when either side is untagged.
double min_altitude_distance(const std::vector<double>& train_z, const std::vector<double>& test_z) {
  if (train_z.empty() || test_z.empty()) {
    return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const double a : train_z) {
    for (const double b : test_z) {
      best = std::min(best, std::abs(a - b));
    }
  }
  return best;
}

}  // namespace

Eigen::VectorXd predict(const SparseModel& model, const std::vector<Eigen::Vector3d>& points) {
  model.validate();
  if (model.empty()) {
    throw NumericError("predict: model has no sources");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    // Same accumulation order as the fit-side reconstruction so that a
    // prediction at the training points reproduces it bit-exactly.
    double watts = 0.0;
    for (std::size_t j = 0; j < model.support.size(); ++j) {
      double d = (points[i] - model.positions[j]).norm();
      if (d < kMinDistance) {
        d = kMinDistance;
      }
      watts += model.powers[j] * fspl_gain(model.propagation, d);
    }
    watts *= model.rho;
    out[static_cast<Eigen::Index>(i)] = watts_to_dbm(watts);
  }
  return out;
}

double rmse_db(const Eigen::VectorXd& predicted_dbm, const Eigen::VectorXd& measured_dbm) {
  if (predicted_dbm.size() != measured_dbm.size() || predicted_dbm.size() == 0) {
    throw NumericError("rmse_db: vectors must be equal-length and non-empty");
  }
  const double mse =
      (predicted_dbm - measured_dbm).squaredNorm() / static_cast<double>(predicted_dbm.size());
  return std::sqrt(mse);
}

std::vector<EvalResult> run_nsbl_sweep(const MeasurementSet& train,
                                       const std::vector<MeasurementSet>& tests,
                                       const VoxelGrid& grid, const PropagationConfig& config,
                                       int n_min, int n_max, const SblPriors& priors) {
  train.validate();
  grid.validate();
  if (n_min < 1 || n_min > n_max || n_max > grid.num_voxels()) {
    throw UsageError("run_nsbl_sweep: need 1 <= n_min <= n_max <= num_voxels");
  }
  if (tests.empty()) {
    throw UsageError("run_nsbl_sweep: at least one test split required");
  }
  for (const auto& t : tests) {
    t.validate();
  }

  const SensingMatrix phi = build_sensing_matrix(config, grid, train.points);
  std::vector<EvalResult> rows;
  rows.reserve(static_cast<std::size_t>(n_max - n_min + 1) * tests.size());
  for (int n = n_min; n <= n_max; ++n) {
    const auto [model, report] = fit_gs_sbl(train, phi, n, priors);
    for (const auto& test : tests) {
      const Eigen::VectorXd predicted = predict(model, test.points);
      EvalResult row;
      row.algorithm = kAlgoGsSbl;
      row.n_sbl = n;
      row.separation_m =
          min_altitude_distance(train.metadata.altitude_tags, test.metadata.altitude_tags);
      row.rmse_db = rmse_db(predicted, test.rsrp_dbm);
      row.n_test = test.size();
      row.per_point_error_db = predicted - test.rsrp_dbm;
      row.train_z = train.metadata.altitude_tags;
      row.test_z = test.metadata.altitude_tags;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<EvalResult> run_separation_comparison(
    const MeasurementSet& data, const std::vector<double>& altitudes,
    const std::vector<double>& separations, const std::vector<std::string>& algorithms,
    const VoxelGrid& grid, const PropagationConfig& config, const SblPriors& priors,
    int n_sources, const Eigen::Vector3d& bs_location, double altitude_tolerance_m) {
  data.validate();
  grid.validate();
  config.validate();
  priors.validate();
  if (altitudes.empty()) {
    throw UsageError("run_separation_comparison: altitude list is empty");
  }
  if (separations.empty()) {
    throw UsageError("run_separation_comparison: separation list is empty");
  }
  if (algorithms.empty()) {
    throw UsageError("run_separation_comparison: algorithm list is empty");
  }
  for (const auto& tag : algorithms) {
    if (tag != kAlgoGsSbl && tag != kAlgoOmp && tag != kAlgoFspl) {
      throw UsageError("run_separation_comparison: unknown algorithm tag '" + tag + "'");
    }
  }
  if (n_sources < 1) {
    throw UsageError("run_separation_comparison: n_sources must be >= 1");
  }

  const std::size_t n_alt = altitudes.size();
  std::vector<MeasurementSet> splits;
  splits.reserve(n_alt);
  for (const double z : altitudes) {
    splits.push_back(filter_by_altitude(data, {z}, altitude_tolerance_m));
  }

  // The fit depends only on (algorithm, training altitude); cache across
  // separations so every pair reuses the same model.
  std::vector<std::optional<SensingMatrix>> matrices(n_alt);
  std::map<std::pair<std::string, std::size_t>, SparseModel> fits;
  const auto model_for = [&](const std::string& tag, std::size_t train_idx) -> const SparseModel& {
    const auto key = std::make_pair(tag, train_idx);
    auto it = fits.find(key);
    if (it != fits.end()) {
      return it->second;
    }
    SparseModel model;
    if (tag == kAlgoFspl) {
      model = fit_fspl_baseline(splits[train_idx], bs_location, config);
    } else {
      if (!matrices[train_idx].has_value()) {
        matrices[train_idx] = build_sensing_matrix(config, grid, splits[train_idx].points);
      }
      if (tag == kAlgoGsSbl) {
        model = fit_gs_sbl(splits[train_idx], *matrices[train_idx], n_sources, priors).first;
      } else {
        model = fit_omp(splits[train_idx], *matrices[train_idx], n_sources);
      }
    }
    return fits.emplace(key, std::move(model)).first->second;
  };

  std::vector<EvalResult> rows;
  rows.reserve(separations.size() * algorithms.size());
  for (const double sep : separations) {
    if (!(sep >= 0.0) || !std::isfinite(sep)) {
      throw UsageError("run_separation_comparison: separations must be finite and >= 0");
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (train idx, test idx)
    for (std::size_t i = 0; i < n_alt; ++i) {
      for (std::size_t j = 0; j < n_alt; ++j) {
        if (std::abs(std::abs(altitudes[i] - altitudes[j]) - sep) <= 1e-9) {
          pairs.emplace_back(i, j);
        }
      }
    }
    if (pairs.empty()) {
      throw UsageError("run_separation_comparison: no altitude pair realizes the separation");
    }

    for (const auto& tag : algorithms) {
      double rmse_sum = 0.0;
      int n_test_sum = 0;
      for (const auto& [ti, si] : pairs) {
        const SparseModel& model = model_for(tag, ti);
        const MeasurementSet& test = splits[si];
        rmse_sum += rmse_db(predict(model, test.points), test.rsrp_dbm);
        n_test_sum += test.size();
      }
      EvalResult row;
      row.algorithm = tag;
      row.n_sbl = tag == kAlgoFspl ? 1 : n_sources;
      row.separation_m = sep;
      row.rmse_db = rmse_sum / static_cast<double>(pairs.size());
      row.n_test = n_test_sum;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace gssbl
