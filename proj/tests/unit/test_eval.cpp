// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gssbl/eval.hpp"

using gssbl::EvalResult;
using gssbl::MeasurementSet;
using gssbl::NumericError;
using gssbl::PropagationConfig;
using gssbl::SblPriors;
using gssbl::SensingMatrix;
using gssbl::SparseModel;
using gssbl::UsageError;
using gssbl::VoxelGrid;

namespace {

struct SceneFixture {
  VoxelGrid grid;
  PropagationConfig cfg;
  std::vector<Eigen::Vector3d> points;
  MeasurementSet ms;

  explicit SceneFixture(double noise_db = 0.0, std::uint64_t seed = 5) {
    grid.counts = {4, 4, 2};
    points = gssbl::zigzag_pattern(-15.0, 115.0, -15.0, 115.0, {10.0, 40.0}, 4, 8);
    gssbl::SyntheticScene scene;
    scene.grid = grid;
    scene.propagation = cfg;
    scene.true_sources = {{5, 5.0}, {26, 0.8}};
    scene.noise_sigma_db = noise_db;
    scene.seed = seed;
    ms = gssbl::generate_synthetic(scene, points);
  }
};

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("prediction at the training points reproduces the fit reconstruction bitwise") {
  const SceneFixture fx(3.0);
  const SensingMatrix phi = gssbl::build_sensing_matrix(fx.cfg, fx.grid, fx.points);
  const auto [model, report] = gssbl::fit_gs_sbl(fx.ms, phi, 2, SblPriors{});
  REQUIRE_FALSE(model.empty());

  const Eigen::VectorXd predicted = gssbl::predict(model, fx.points);
  REQUIRE(predicted.size() == fx.ms.size());
  for (Eigen::Index i = 0; i < predicted.size(); ++i) {
    double watts = 0.0;
    for (std::size_t j = 0; j < model.support.size(); ++j) {
      watts += model.powers[j] * phi.values(i, model.support[j]);
    }
    watts *= model.rho;
    CHECK(predicted[i] == gssbl::watts_to_dbm(watts));
  }
}

TEST_CASE("prediction handles off-grid sources and rejects empty models") {
  const SceneFixture fx;
  const Eigen::Vector3d bs(30.0, 40.0, 5.0);
  const SparseModel model = gssbl::fit_fspl_baseline(fx.ms, bs, fx.cfg, nullptr);
  REQUIRE_FALSE(model.empty());
  const Eigen::VectorXd predicted = gssbl::predict(model, fx.points);
  for (Eigen::Index i = 0; i < predicted.size(); ++i) {
    double d = (fx.points[static_cast<std::size_t>(i)] - bs).norm();
    if (d < gssbl::kMinDistance) {
      d = gssbl::kMinDistance;
    }
    const double watts = model.powers[0] * gssbl::fspl_gain(fx.cfg, d);
    CHECK(predicted[i] == doctest::Approx(gssbl::watts_to_dbm(watts)).epsilon(1e-14));
  }

  SparseModel empty;
  empty.algorithm = gssbl::kAlgoGsSbl;
  empty.n_sources_requested = 1;
  CHECK_THROWS_AS(gssbl::predict(empty, fx.points), NumericError);
}

TEST_CASE("rmse_db") {
  Eigen::VectorXd a(2), b(2);
  a << -60.0, -70.0;
  b << -61.0, -69.0;
  CHECK(gssbl::rmse_db(a, b) == 1.0);  // symmetric +-1 dB errors
  CHECK(gssbl::rmse_db(a, a) == 0.0);

  Eigen::VectorXd c(3);
  c << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(gssbl::rmse_db(a, c), NumericError);
  const Eigen::VectorXd empty;
  CHECK_THROWS_AS(gssbl::rmse_db(empty, empty), NumericError);
}

TEST_CASE("sparsity sweep emits one row per level and test split") {
  const SceneFixture fx(2.0, 17);
  const MeasurementSet train = gssbl::filter_by_altitude(fx.ms, {10.0}, 1.0);
  const std::vector<MeasurementSet> tests = {
      gssbl::filter_by_altitude(fx.ms, {40.0}, 1.0),
      gssbl::filter_by_altitude(fx.ms, {10.0}, 1.0),
  };

  const std::vector<EvalResult> rows =
      gssbl::run_nsbl_sweep(train, tests, fx.grid, fx.cfg, 1, 4, SblPriors{});
  REQUIRE(rows.size() == 4 * 2);

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const EvalResult& row = rows[r];
    CHECK(row.algorithm == gssbl::kAlgoGsSbl);
    CHECK(row.n_sbl == 1 + static_cast<int>(r / 2));
    CHECK(row.n_test == tests[r % 2].size());
    CHECK(row.per_point_error_db.size() == row.n_test);
    CHECK(row.rmse_db >= 0.0);
    CHECK(std::isfinite(row.rmse_db));
    // Altitude distance between the single training altitude and the split.
    CHECK(row.separation_m == (r % 2 == 0 ? 30.0 : 0.0));
    CHECK(row.train_z == std::vector<double>{10.0});
    CHECK(row.seed == 0);  // the experiment driver stamps seeds, not the library

    // The RMSE is consistent with the per-point errors it summarizes.
    const double mse = row.per_point_error_db.squaredNorm() /
                       static_cast<double>(row.per_point_error_db.size());
    CHECK(row.rmse_db == doctest::Approx(std::sqrt(mse)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(gssbl::run_nsbl_sweep(train, tests, fx.grid, fx.cfg, 0, 4, SblPriors{}),
                  UsageError);
  CHECK_THROWS_AS(gssbl::run_nsbl_sweep(train, tests, fx.grid, fx.cfg, 3, 2, SblPriors{}),
                  UsageError);
  CHECK_THROWS_AS(
      gssbl::run_nsbl_sweep(train, tests, fx.grid, fx.cfg, 1, fx.grid.num_voxels() + 1,
                            SblPriors{}),
      UsageError);
  CHECK_THROWS_AS(gssbl::run_nsbl_sweep(train, {}, fx.grid, fx.cfg, 1, 2, SblPriors{}),
                  UsageError);
}

TEST_CASE("separation comparison pairs altitudes and averages over pairs") {
  const SceneFixture fx(4.0, 23);
  const std::vector<double> altitudes = {10.0, 40.0};
  const std::vector<std::string> algos = {gssbl::kAlgoGsSbl, gssbl::kAlgoOmp, gssbl::kAlgoFspl};
  const Eigen::Vector3d bs(0.0, 0.0, 10.0);

  const std::vector<EvalResult> rows = gssbl::run_separation_comparison(
      fx.ms, altitudes, {0.0, 30.0}, algos, fx.grid, fx.cfg, SblPriors{}, 2, bs);
  REQUIRE(rows.size() == 2 * 3);  // separations x algorithms

  const int total = fx.ms.size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const EvalResult& row = rows[r];
    CHECK(row.algorithm == algos[r % 3]);
    CHECK(row.separation_m == (r < 3 ? 0.0 : 30.0));
    CHECK(row.n_sbl == (row.algorithm == gssbl::kAlgoFspl ? 1 : 2));
    // Both separations realize two (train, test) pairs covering every sample.
    CHECK(row.n_test == total);
    CHECK(std::isfinite(row.rmse_db));
    CHECK(row.rmse_db >= 0.0);
    CHECK(row.per_point_error_db.size() == 0);  // pair-averaged rows carry no vector
  }

  // Self-evaluation (0 m) can only be easier than 30 m generalization.
  CHECK(rows[0].rmse_db <= rows[3].rmse_db);

  CHECK_THROWS_AS(gssbl::run_separation_comparison(fx.ms, altitudes, {25.0}, algos, fx.grid,
                                                   fx.cfg, SblPriors{}, 2, bs),
                  UsageError);  // no pair at 25 m
  CHECK_THROWS_AS(gssbl::run_separation_comparison(fx.ms, altitudes, {-1.0}, algos, fx.grid,
                                                   fx.cfg, SblPriors{}, 2, bs),
                  UsageError);
  CHECK_THROWS_AS(gssbl::run_separation_comparison(fx.ms, altitudes, {0.0}, {"bogus"}, fx.grid,
                                                   fx.cfg, SblPriors{}, 2, bs),
                  UsageError);
  CHECK_THROWS_AS(gssbl::run_separation_comparison(fx.ms, {}, {0.0}, algos, fx.grid, fx.cfg,
                                                   SblPriors{}, 2, bs),
                  UsageError);
  CHECK_THROWS_AS(gssbl::run_separation_comparison(fx.ms, altitudes, {}, algos, fx.grid, fx.cfg,
                                                   SblPriors{}, 2, bs),
                  UsageError);
  CHECK_THROWS_AS(gssbl::run_separation_comparison(fx.ms, altitudes, {0.0}, algos, fx.grid,
                                                   fx.cfg, SblPriors{}, 0, bs),
                  UsageError);
  CHECK_THROWS_AS(gssbl::run_separation_comparison(fx.ms, {500.0}, {0.0}, algos, fx.grid,
                                                   fx.cfg, SblPriors{}, 2, bs),
                  gssbl::DataError);  // empty split
}

}  // TEST_SUITE
