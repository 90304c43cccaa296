// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gssbl/data.hpp"
#include "gssbl/eval.hpp"
#include "gssbl/gs_sbl.hpp"

namespace gssbl {

inline constexpr int kModelSchemaVersion = 1;

// FNV-1a 64-bit digest; used to fingerprint input files in model metadata.
std::uint64_t fnv1a64(const void* bytes, std::size_t len);
std::string digest_string(const std::string& bytes);

// ISO-8601 UTC timestamp; honors SOURCE_DATE_EPOCH when set (reproducible
// builds of experiment artifacts).
std::string creation_timestamp();

// Writes the model as `.rem.json` (schema_version, algorithm, grid,
// propagation, support entries {index, center_xyz_m, power_w}, rho,
// n_sources_requested, flags, creation metadata). All numbers round-trip
// bit-exactly (shortest-round-trip decimal encoding). Validates the model
// first.
void save_model(const SparseModel& model, const std::string& path,
                const std::string& input_digest = "");

// Parses and validates a `.rem.json` file. Throws DataError for an
// unreadable or malformed file, a schema_version other than
// kModelSchemaVersion, any SparseModel invariant violation, or a support
// entry whose stored center disagrees with its voxel index.
SparseModel load_model(const std::string& path);

// Report JSON. Under SOURCE_DATE_EPOCH the serialized wall_time_s is zeroed
// (a genuine duration can never be bit-stable across runs).
void save_report(const FitReport& report, const std::string& path);

// Long-format experiment table: algorithm,n_sbl,separation_m,seed,rmse_db,n_test.
void save_results_csv(const std::vector<EvalResult>& rows, const std::string& path);

// JSON <-> config types. The parse_* functions throw UsageError on semantic
// violations; the load_*_file functions throw DataError for unreadable or
// syntactically invalid files.
nlohmann::json grid_to_json(const VoxelGrid& grid);
VoxelGrid parse_grid_json(const nlohmann::json& j);
VoxelGrid load_grid_file(const std::string& path);

nlohmann::json propagation_to_json(const PropagationConfig& config);
PropagationConfig parse_propagation_json(const nlohmann::json& j);

// Scene JSON: {grid, propagation?, true_sources: [{index|xyz, power_dbm}],
// noise_sigma_db?, noise_sigma_w?, noise_mode?, seed?, path_loss_exponent?}.
// A source given as xyz is mapped to its enclosing voxel.
SyntheticScene parse_scene_json(const nlohmann::json& j);
SyntheticScene load_scene_file(const std::string& path);

}  // namespace gssbl
