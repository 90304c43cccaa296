// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "gssbl/gs_sbl.hpp"
#include "gssbl/kernels.hpp"
#include "gssbl/persistence.hpp"

#include "helpers.hpp"

using gssbl::DataError;
using gssbl::MeasurementSet;
using gssbl::NumericError;
using gssbl::SblPriors;
using gssbl::SensingMatrix;
using gssbl::SparseModel;
using gssbl::UsageError;
using gssbl::VoxelGrid;

namespace {

struct RecoveryFixture {
  VoxelGrid grid;
  gssbl::PropagationConfig cfg;
  std::vector<Eigen::Vector3d> points;
  SensingMatrix phi;

  RecoveryFixture() {
    grid.counts = {4, 4, 2};
    points = gssbl::zigzag_pattern(-15.0, 115.0, -15.0, 115.0, {8.0, 22.0}, 5, 8);
    phi = gssbl::build_sensing_matrix(cfg, grid, points);
  }

  MeasurementSet noiseless(const std::vector<std::pair<int, double>>& sources) const {
    gssbl::SyntheticScene scene;
    scene.grid = grid;
    scene.propagation = cfg;
    scene.true_sources = sources;
    return gssbl::generate_synthetic(scene, points);
  }
};

SparseModel valid_model() {
  SparseModel m;
  m.algorithm = gssbl::kAlgoGsSbl;
  m.grid.counts = {4, 4, 2};
  m.support = {3, 17};
  m.positions = {gssbl::voxel_center(m.grid, 3), gssbl::voxel_center(m.grid, 17)};
  m.powers = {1.0, 2.0};
  m.rho = 0.9;
  m.n_sources_requested = 2;
  return m;
}

}  // namespace

TEST_SUITE("gs_sbl") {

TEST_CASE("model validation accepts a consistent model") {
  CHECK_NOTHROW(valid_model().validate());

  SparseModel empty = valid_model();
  empty.support.clear();
  empty.positions.clear();
  empty.powers.clear();
  CHECK_NOTHROW(empty.validate());  // an empty model is legal

  SparseModel fspl = valid_model();
  fspl.algorithm = gssbl::kAlgoFspl;
  fspl.support = {-1};
  fspl.positions = {Eigen::Vector3d(10.0, 20.0, 30.0)};
  fspl.powers = {0.5};
  fspl.n_sources_requested = 1;
  CHECK_NOTHROW(fspl.validate());  // -1 marks the off-grid base station
}

TEST_CASE("model validation rejects every invariant violation") {
  SparseModel m = valid_model();
  m.algorithm = "bogus";
  CHECK_THROWS_AS(m.validate(), DataError);

  m = valid_model();
  m.powers.pop_back();
  CHECK_THROWS_AS(m.validate(), DataError);

  m = valid_model();
  m.rho = 0.0;
  CHECK_THROWS_AS(m.validate(), DataError);
  m.rho = 1.5;
  CHECK_THROWS_AS(m.validate(), DataError);

  m = valid_model();
  m.n_sources_requested = 1;  // |support| = 2 exceeds the request
  CHECK_THROWS_AS(m.validate(), DataError);

  m = valid_model();
  m.support[1] = 3;  // duplicate
  CHECK_THROWS_AS(m.validate(), DataError);

  m = valid_model();
  m.support[1] = m.grid.num_voxels();  // out of range
  CHECK_THROWS_AS(m.validate(), DataError);

  m = valid_model();
  m.support[1] = -1;  // off-grid marker outside the FSPL baseline
  CHECK_THROWS_AS(m.validate(), DataError);

  m = valid_model();
  m.powers[0] = 0.0;
  CHECK_THROWS_AS(m.validate(), DataError);
  m.powers[0] = -2.0;
  CHECK_THROWS_AS(m.validate(), DataError);

  m = valid_model();
  m.algorithm = gssbl::kAlgoFspl;
  m.n_sources_requested = 2;  // fspl carries at most one source
  CHECK_THROWS_AS(m.validate(), DataError);
}

TEST_CASE("residual deflation clips at zero") {
  Eigen::MatrixXd values(2, 2);
  values << 2.0, 1.0,  //
      0.5, 1.0;
  const SensingMatrix phi = testutil::hand_matrix(values);
  const Eigen::VectorXd y = Eigen::Vector2d(1.0, 1.0);

  // Empty support: unchanged.
  const Eigen::VectorXd same = gssbl::deflate_residual(y, {}, {}, phi);
  CHECK(same[0] == 1.0);
  CHECK(same[1] == 1.0);

  // One source overshoots the first entry; the clip floors it at zero.
  const Eigen::VectorXd res = gssbl::deflate_residual(y, {0}, {1.0}, phi);
  CHECK(res[0] == 0.0);
  CHECK(res[1] == 0.5);

  CHECK_THROWS_AS(gssbl::deflate_residual(y, {0}, {1.0, 2.0}, phi), NumericError);
  CHECK_THROWS_AS(gssbl::deflate_residual(y, {5}, {1.0}, phi), NumericError);
  CHECK_THROWS_AS(gssbl::deflate_residual(Eigen::Vector3d(1, 1, 1), {0}, {1.0}, phi),
                  NumericError);
}

TEST_CASE("selection picks the minimum-error candidate") {
  Eigen::MatrixXd values(3, 2);
  values << 1.0, 1.0,  //
      2.0, 1.0,        //
      4.0, 1.0;
  const SensingMatrix phi = testutil::hand_matrix(values);
  const SblPriors priors;
  std::vector<char> excluded(2, 0);

  // y is an exact multiple of column 0.
  const Eigen::VectorXd y = 3.0 * values.col(0);
  const std::optional<gssbl::Selection> sel =
      gssbl::select_next_source(y, phi, priors, excluded);
  REQUIRE(sel.has_value());
  CHECK(sel->index == 0);
  // With only 3 samples the Gamma floors shrink the posterior mean by a few
  // percent; the global scale refinement compensates in the full pipeline.
  CHECK(sel->power == doctest::Approx(3.0).epsilon(0.1));
  CHECK(sel->power < 3.0);

  // With column 0 excluded the other one wins.
  excluded[0] = 1;
  int evaluated = 0;
  const std::optional<gssbl::Selection> sel2 =
      gssbl::select_next_source(y, phi, priors, excluded, &evaluated);
  REQUIRE(sel2.has_value());
  CHECK(sel2->index == 1);
  CHECK(evaluated == 1);

  // Nothing selectable at all.
  excluded[1] = 1;
  CHECK_THROWS_AS(gssbl::select_next_source(y, phi, priors, excluded), NumericError);
}

TEST_CASE("selection returns nothing for a zero residual") {
  Eigen::MatrixXd values(2, 2);
  values << 1.0, 2.0,  //
      1.0, 3.0;
  const SensingMatrix phi = testutil::hand_matrix(values);
  std::vector<char> excluded(2, 0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  const std::optional<gssbl::Selection> sel =
      gssbl::select_next_source(zero, phi, SblPriors{}, excluded);
  CHECK_FALSE(sel.has_value());
}

TEST_CASE("selection ties break to the lowest index") {
  Eigen::MatrixXd values(2, 3);
  values.col(0) = Eigen::Vector2d(1.0, 2.0);
  values.col(1) = Eigen::Vector2d(1.0, 2.0);  // identical to column 0
  values.col(2) = Eigen::Vector2d(1.0, 2.0);
  const SensingMatrix phi = testutil::hand_matrix(values);
  std::vector<char> excluded(3, 0);
  const Eigen::VectorXd y = 2.5 * values.col(0);
  const std::optional<gssbl::Selection> sel =
      gssbl::select_next_source(y, phi, SblPriors{}, excluded);
  REQUIRE(sel.has_value());
  CHECK(sel->index == 0);
}

TEST_CASE("scale refinement solves the 1-D problem exactly") {
  Eigen::MatrixXd values(3, 1);
  values << 1.0, 2.0, 4.0;
  const SensingMatrix phi = testutil::hand_matrix(values);
  const std::vector<int> support = {0};
  const std::vector<double> powers = {2.0};
  const Eigen::VectorXd recon = 2.0 * values.col(0);

  // y exactly half the reconstruction: rho = 0.5 bitwise (power-of-two data).
  bool clamped = true;
  const double rho = gssbl::refine_power_scale((0.5 * recon).eval(), support, powers, phi,
                                               &clamped);
  CHECK(rho == 0.5);
  CHECK_FALSE(clamped);

  // y above the reconstruction clamps at 1.
  const double hi = gssbl::refine_power_scale((2.0 * recon).eval(), support, powers, phi,
                                              &clamped);
  CHECK(hi == 1.0);
  CHECK(clamped);

  // An anti-correlated y floors at the open-interval guard.
  const double lo = gssbl::refine_power_scale((-recon).eval(), support, powers, phi, &clamped);
  CHECK(lo == gssbl::kRhoFloor);
  CHECK(clamped);

  // Degenerate reconstruction.
  CHECK_THROWS_AS(
      gssbl::refine_power_scale(recon, support, {0.0}, phi, nullptr), NumericError);
  CHECK_THROWS_AS(gssbl::refine_power_scale(recon, {}, {}, phi, nullptr), NumericError);
}

TEST_CASE("noiseless single source is recovered with a clamped scale") {
  const RecoveryFixture fx;
  const MeasurementSet ms = fx.noiseless({{9, 4.0}});
  const auto [model, report] = gssbl::fit_gs_sbl(ms, fx.phi, 1, SblPriors{});

  REQUIRE(model.support.size() == 1);
  CHECK(model.support[0] == 9);
  // The posterior mean shrinks slightly below the true power; the scale
  // refinement then clamps at 1, leaving the small shrinkage in place.
  CHECK(model.rho == 1.0);
  const double effective = model.rho * model.powers[0];
  CHECK(effective == doctest::Approx(4.0).epsilon(0.01));
  CHECK((model.positions[0] - gssbl::voxel_center(fx.grid, 9)).isZero(0.0));
  CHECK(std::count(report.flags.begin(), report.flags.end(), "rho_clamped") == 1);
  CHECK(report.candidates_evaluated == std::vector<int>{fx.grid.num_voxels()});
  REQUIRE(report.residual_norm_per_stage.size() == 2);
  CHECK(report.residual_norm_per_stage[1] < report.residual_norm_per_stage[0]);
}

TEST_CASE("noiseless pair fit composes the documented stage primitives") {
  const RecoveryFixture fx;
  const std::vector<std::pair<int, double>> truth = {{5, 5.0}, {26, 0.8}};
  const MeasurementSet ms = fx.noiseless(truth);
  const SblPriors priors;
  const auto [model, report] = gssbl::fit_gs_sbl(ms, fx.phi, 2, priors);

  REQUIRE(model.support.size() == 2);
  const std::set<int> got(model.support.begin(), model.support.end());
  CHECK(got == std::set<int>{5, 26});

  // The fit must equal the composition of its published primitives, bitwise:
  // score the full signal, deflate with the selected mean, score the clipped
  // residual, then refine the global scale on the original signal.
  const int first = model.support[0];
  const int second = model.support[1];
  const gssbl::MicroSblState s1 = gssbl::run_micro_sbl(fx.phi.values.col(first), ms.rss_w, priors);
  CHECK(model.powers[0] == s1.mu);
  const Eigen::VectorXd r2 =
      gssbl::deflate_residual(ms.rss_w, {first}, {s1.mu}, fx.phi);
  const gssbl::MicroSblState s2 = gssbl::run_micro_sbl(fx.phi.values.col(second), r2, priors);
  CHECK(model.powers[1] == s2.mu);
  CHECK(model.rho ==
        gssbl::refine_power_scale(ms.rss_w, model.support, model.powers, fx.phi, nullptr));

  // Power accuracy on this deliberately tight 100 m fixture is limited by
  // column cross-correlation: the first stage absorbs part of the weaker
  // source (overshoot), whose own estimate then falls short. The windows
  // below cover the analytic cross-talk (about +3% and -26% here).
  const double strong = model.support[0] == 5 ? model.rho * model.powers[0]
                                              : model.rho * model.powers[1];
  const double weak = model.support[0] == 26 ? model.rho * model.powers[0]
                                             : model.rho * model.powers[1];
  CHECK(strong >= 5.0);
  CHECK(strong <= 5.0 * 1.10);
  CHECK(weak <= 0.8);
  CHECK(weak >= 0.8 * 0.65);

  CHECK(report.candidates_evaluated == std::vector<int>{32, 31});
  REQUIRE(report.residual_norm_per_stage.size() == 3);
  CHECK(report.residual_norm_per_stage[1] <= report.residual_norm_per_stage[0]);
  CHECK(report.residual_norm_per_stage[2] <= report.residual_norm_per_stage[1]);
  CHECK(report.selected_errors.size() == 2);
  CHECK_NOTHROW(model.validate());
}

TEST_CASE("a stage with no improving candidate stops the pursuit") {
  // Column 1 is orthogonal to whatever remains after stage 1's clipped
  // deflation (the residual concentrates on the second sample), so stage 2
  // finds no candidate with a positive posterior mean.
  Eigen::MatrixXd values(2, 2);
  values << 1.0, 1.0,  //
      1.0, 0.0;
  const SensingMatrix phi = testutil::hand_matrix(values);
  const MeasurementSet ms = testutil::ms_from_watts(Eigen::Vector2d(1.0, 3.0));
  const auto [model, report] = gssbl::fit_gs_sbl(ms, phi, 2, SblPriors{});

  REQUIRE(model.support == std::vector<int>{0});
  CHECK(std::count(report.flags.begin(), report.flags.end(), "early_stop_no_improvement") == 1);
  CHECK(report.candidates_evaluated == std::vector<int>{2, 1});
  CHECK(report.residual_norm_per_stage.size() == 2);
  CHECK(report.selected_errors.size() == 1);
  CHECK(model.n_sources_requested == 2);
  CHECK_NOTHROW(model.validate());
}

TEST_CASE("randomized fits never duplicate a source and never increase the residual") {
  std::mt19937_64 rng(2024);
  const SblPriors priors;
  for (int trial = 0; trial < 40; ++trial) {
    VoxelGrid grid;
    grid.counts = {2 + static_cast<int>(rng() % 2), 2 + static_cast<int>(rng() % 2),
                   1 + static_cast<int>(rng() % 2)};
    grid.cell_size = Eigen::Vector3d(30.0, 30.0, 12.0);
    gssbl::SyntheticScene scene;
    scene.grid = grid;
    scene.noise_sigma_db = static_cast<double>(rng() % 6);
    scene.seed = rng();
    const int n = grid.num_voxels();
    const int k_true = 1 + static_cast<int>(rng() % 2);
    for (int s = 0; s < k_true; ++s) {
      scene.true_sources.emplace_back(static_cast<int>(rng() % static_cast<std::uint64_t>(n)),
                                      0.5 + static_cast<double>(rng() % 8));
    }
    // Duplicate true indices are fine for generation; powers superpose.
    const std::vector<Eigen::Vector3d> pts = gssbl::uniform_pattern(
        Eigen::Vector3d(-20.0, -20.0, 5.0), Eigen::Vector3d(120.0, 120.0, 60.0),
        30 + static_cast<int>(rng() % 30), rng());
    const MeasurementSet ms = gssbl::generate_synthetic(scene, pts);
    const SensingMatrix phi = gssbl::build_sensing_matrix(scene.propagation, grid, pts);
    const int k_fit = 1 + static_cast<int>(rng() % std::min(4, n));

    const auto [model, report] = gssbl::fit_gs_sbl(ms, phi, k_fit, priors);
    CAPTURE(trial);

    const std::set<int> unique(model.support.begin(), model.support.end());
    CHECK(unique.size() == model.support.size());
    CHECK(static_cast<int>(model.support.size()) <= k_fit);
    for (std::size_t i = 1; i < report.residual_norm_per_stage.size(); ++i) {
      CHECK(report.residual_norm_per_stage[i] <= report.residual_norm_per_stage[i - 1]);
    }
    CHECK_NOTHROW(model.validate());
    CHECK(report.residual_norm_per_stage.size() == model.support.size() + 1);
  }
}

TEST_CASE("fits are bit-identical for any thread count") {
  const RecoveryFixture fx;
  gssbl::SyntheticScene scene;
  scene.grid = fx.grid;
  scene.true_sources = {{5, 5.0}, {26, 0.8}};
  scene.noise_sigma_db = 3.0;
  scene.seed = 31337;
  const MeasurementSet ms = gssbl::generate_synthetic(scene, fx.points);

  gssbl::set_num_threads(1);
  const auto [m1, r1] = gssbl::fit_gs_sbl(ms, fx.phi, 3, SblPriors{});
  for (int threads : {4, 8}) {
    gssbl::set_num_threads(threads);
    const auto [m, r] = gssbl::fit_gs_sbl(ms, fx.phi, 3, SblPriors{});
    CHECK(m.support == m1.support);
    CHECK(m.powers == m1.powers);
    CHECK(m.rho == m1.rho);
    CHECK(r.residual_norm_per_stage == r1.residual_norm_per_stage);
  }
  gssbl::set_num_threads(0);
}

TEST_CASE("fit argument validation") {
  const RecoveryFixture fx;
  const MeasurementSet ms = fx.noiseless({{9, 4.0}});
  CHECK_THROWS_AS(gssbl::fit_gs_sbl(ms, fx.phi, 0, SblPriors{}), UsageError);
  CHECK_THROWS_AS(gssbl::fit_gs_sbl(ms, fx.phi, fx.grid.num_voxels() + 1, SblPriors{}),
                  UsageError);

  MeasurementSet shorter = ms;
  shorter.points.pop_back();
  shorter.rsrp_dbm.conservativeResize(shorter.rsrp_dbm.size() - 1);
  shorter.rss_w.conservativeResize(shorter.rss_w.size() - 1);
  CHECK_THROWS_AS(gssbl::fit_gs_sbl(shorter, fx.phi, 1, SblPriors{}), NumericError);
}

}  // TEST_SUITE
