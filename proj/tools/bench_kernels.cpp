// SPDX-License-Identifier: Apache-2.0
//
// Compares the serial reference kernels with their OpenMP twins on a
// mid-sized scene (500 candidate voxels, 288 samples). The two variants are
// bit-identical by contract; this target only measures throughput.
#include <benchmark/benchmark.h>

#include <Eigen/Core>
#include <vector>

#include "gssbl/data.hpp"
#include "gssbl/kernels.hpp"

namespace {

struct Fixture {
  gssbl::VoxelGrid grid;
  gssbl::PropagationConfig prop;
  std::vector<Eigen::Vector3d> points;
  gssbl::SensingMatrix phi;
  Eigen::VectorXd target;
  std::vector<char> excluded;
  gssbl::SblPriors priors;

  Fixture() {
    grid.counts = {10, 10, 5};
    points = gssbl::zigzag_pattern(-10.0, 260.0, -10.0, 260.0, {10.0, 30.0, 50.0}, 8, 12);
    phi = gssbl::build_sensing_matrix(prop, grid, points);

    gssbl::SyntheticScene scene;
    scene.grid = grid;
    scene.propagation = prop;
    scene.true_sources = {{7, 0.5}, {123, 0.2}};
    scene.noise_sigma_db = 3.0;
    scene.seed = 7;
    target = gssbl::generate_synthetic(scene, points).rss_w;
    excluded.assign(static_cast<std::size_t>(grid.num_voxels()), 0);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_fill_sensing_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(f.points.size()), f.grid.num_voxels());
  for (auto _ : state) {
    gssbl::kernels::fill_sensing_rows_serial(f.prop, f.grid, f.points, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_fill_sensing_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  gssbl::set_num_threads(0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(f.points.size()), f.grid.num_voxels());
  for (auto _ : state) {
    gssbl::kernels::fill_sensing_rows_parallel(f.prop, f.grid, f.points, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_score_candidates_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  std::vector<double> mus(static_cast<std::size_t>(f.phi.cols()));
  std::vector<double> errors(mus.size());
  for (auto _ : state) {
    gssbl::kernels::score_candidates_serial(f.phi, f.target, f.priors, f.excluded, mus, errors);
    benchmark::DoNotOptimize(errors.data());
  }
}

void BM_score_candidates_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  gssbl::set_num_threads(0);
  std::vector<double> mus(static_cast<std::size_t>(f.phi.cols()));
  std::vector<double> errors(mus.size());
  for (auto _ : state) {
    gssbl::kernels::score_candidates_parallel(f.phi, f.target, f.priors, f.excluded, mus, errors);
    benchmark::DoNotOptimize(errors.data());
  }
}

void BM_correlation_scan_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  std::vector<double> scores(static_cast<std::size_t>(f.phi.cols()));
  for (auto _ : state) {
    gssbl::kernels::correlation_scan_serial(f.phi, f.target, f.excluded, scores);
    benchmark::DoNotOptimize(scores.data());
  }
}

void BM_correlation_scan_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  gssbl::set_num_threads(0);
  std::vector<double> scores(static_cast<std::size_t>(f.phi.cols()));
  for (auto _ : state) {
    gssbl::kernels::correlation_scan_parallel(f.phi, f.target, f.excluded, scores);
    benchmark::DoNotOptimize(scores.data());
  }
}

}  // namespace

BENCHMARK(BM_fill_sensing_serial);
BENCHMARK(BM_fill_sensing_parallel);
BENCHMARK(BM_score_candidates_serial);
BENCHMARK(BM_score_candidates_parallel);
BENCHMARK(BM_correlation_scan_serial);
BENCHMARK(BM_correlation_scan_parallel);

BENCHMARK_MAIN();
