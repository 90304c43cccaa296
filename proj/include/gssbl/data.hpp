// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gssbl/grid.hpp"
#include "gssbl/propagation.hpp"

namespace gssbl {

// M sample locations with received-signal-strength values in both dBm and
// Watts (rss_w[i] == dbm_to_watts(rsrp_dbm[i]) always).
struct MeasurementSet {
  std::vector<Eigen::Vector3d> points;  // sample locations [m]
  Eigen::VectorXd rsrp_dbm;             // measured RSS [dBm]
  Eigen::VectorXd rss_w;                // the same values [W]

  struct Metadata {
    std::vector<double> altitude_tags;  // distinct z values, ascending
    std::string source_file;            // origin file, if loaded
    int dropped_rows = 0;               // malformed rows skipped at load
  } metadata;

  int size() const noexcept { return static_cast<int>(points.size()); }

  // Throws DataError unless M >= 1, all sizes agree, all coordinates are
  // finite, and the dBm/Watt representations are consistent.
  void validate() const;
};

// Builds a MeasurementSet from Watts-domain values; derives the dBm vector
// and the altitude tags. All rss_w entries must be strictly positive.
MeasurementSet make_measurement_set(std::vector<Eigen::Vector3d> points,
                                    const Eigen::VectorXd& rss_w);

enum class NoiseMode {
  log_normal_db,  // multiplicative 10^(n/10), n ~ N(0, noise_sigma_db)
  awgn_watts,     // additive n ~ N(0, noise_sigma_w), clipped to stay positive
};

// Ground-truth scenario for the synthetic generator. The seed fully
// determines the generated data.
struct SyntheticScene {
  std::vector<std::pair<int, double>> true_sources;  // (voxel index, power [W])
  double noise_sigma_db = 0.0;                       // shadowing std dev [dB]
  double noise_sigma_w = 0.0;                        // additive noise std dev [W]
  NoiseMode noise_mode = NoiseMode::log_normal_db;
  std::uint64_t seed = 0;
  double path_loss_exponent = 2.0;  // 2.0 reproduces free space exactly
  VoxelGrid grid;
  PropagationConfig propagation;

  // Throws UsageError on invalid members (indices out of range, powers <= 0,
  // negative noise, non-positive exponent).
  void validate() const;
};

// CSV header names for the measurement columns; the export schema of the
// source dataset is not fixed, so the mapping is configurable.
struct CsvColumnMapping {
  std::string x = "x";
  std::string y = "y";
  std::string z = "z";
  std::string rsrp = "rsrp_dbm";
};

// Parses a headered CSV. Rows with a wrong field count, unparsable numbers,
// or non-finite values are dropped and counted in metadata.dropped_rows.
// Throws DataError for an unreadable/empty file, missing mapped columns, or
// zero surviving rows.
MeasurementSet load_measurements_csv(const std::string& path,
                                     const CsvColumnMapping& mapping = {});

// Writes x,y,z,rsrp columns (mapped names) with round-trip-exact numeric
// formatting (%.17g).
void save_measurements_csv(const MeasurementSet& ms, const std::string& path,
                           const CsvColumnMapping& mapping = {});

// Loads only the coordinate columns; an empty data section yields an empty
// vector (not an error). Malformed rows are dropped.
std::vector<Eigen::Vector3d> load_points_csv(const std::string& path,
                                             const CsvColumnMapping& mapping = {});

// Keeps samples whose z lies within tolerance_m of any listed value,
// preserving order. Throws UsageError for a negative tolerance and DataError
// when the result is empty.
MeasurementSet filter_by_altitude(const MeasurementSet& ms, const std::vector<double>& z_values,
                                  double tolerance_m);

// rss_w[i] = sum over true sources of power * gain(distance), with the
// near-field clamp, then the configured noise applied. path_loss_exponent 2
// uses fspl_gain verbatim; other exponents use
// Gt*Gr*(lambda/4pi)^2 * d^-eta (d0 = 1 m). Deterministic given the seed.
MeasurementSet generate_synthetic(const SyntheticScene& scene,
                                  const std::vector<Eigen::Vector3d>& sample_points);

// Serpentine survey: per altitude, `lines` constant-y sweeps of
// points_per_line samples each, alternating x direction line to line.
std::vector<Eigen::Vector3d> zigzag_pattern(double x0, double x1, double y0, double y1,
                                            const std::vector<double>& altitudes, int lines,
                                            int points_per_line);

// `count` points uniform in the box [lo, hi], deterministic given the seed.
std::vector<Eigen::Vector3d> uniform_pattern(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                                             int count, std::uint64_t seed);

}  // namespace gssbl
