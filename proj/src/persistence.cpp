// SPDX-License-Identifier: Apache-2.0
#include "gssbl/persistence.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace gssbl {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path);
  }
  out << content;
  if (!out) {
    throw DataError("write failed: " + path);
  }
}

json parse_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

Eigen::Vector3d parse_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw UsageError(what + " must be a 3-element array");
  }
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) {
      throw UsageError(what + " must contain numbers");
    }
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

double require_number(const json& j, const std::string& what) {
  if (!j.is_number()) {
    throw UsageError(what + " must be a number");
  }
  return j.get<double>();
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw UsageError(what + ": unknown key '" + it.key() + "'");
    }
  }
}

// Voxel containing a physical point (floor division per axis); points outside
// the grid are rejected.
int enclosing_voxel(const VoxelGrid& grid, const Eigen::Vector3d& p) {
  std::array<int, 3> c{};
  for (int axis = 0; axis < 3; ++axis) {
    const double rel = (p[axis] - grid.origin[axis]) / grid.cell_size[axis];
    const double f = std::floor(rel);
    if (!(f >= 0.0) || f >= static_cast<double>(grid.counts[static_cast<std::size_t>(axis)])) {
      throw UsageError("scene source lies outside the grid");
    }
    c[static_cast<std::size_t>(axis)] = static_cast<int>(f);
  }
  return index_of(grid, c[0], c[1], c[2]);
}

}  // namespace

std::uint64_t fnv1a64(const void* bytes, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string digest_string(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016" PRIx64, fnv1a64(bytes.data(), bytes.size()));
  return buf;
}

std::string creation_timestamp() {
  std::time_t t = 0;
  const char* pinned = std::getenv("SOURCE_DATE_EPOCH");
  if (pinned != nullptr && *pinned != '\0') {
    char* end = nullptr;
    const long long v = std::strtoll(pinned, &end, 10);
    t = end != pinned ? static_cast<std::time_t>(v) : std::time(nullptr);
  } else {
    t = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void save_model(const SparseModel& model, const std::string& path,
                const std::string& input_digest) {
  model.validate();
  json support = json::array();
  for (std::size_t j = 0; j < model.support.size(); ++j) {
    const auto& pos = model.positions[j];
    support.push_back(json{{"index", model.support[j]},
                           {"center_xyz_m", {pos.x(), pos.y(), pos.z()}},
                           {"power_w", model.powers[j]}});
  }
  const json doc{{"schema_version", kModelSchemaVersion},
                 {"algorithm", model.algorithm},
                 {"grid", grid_to_json(model.grid)},
                 {"propagation", propagation_to_json(model.propagation)},
                 {"support", support},
                 {"rho", model.rho},
                 {"n_sources_requested", model.n_sources_requested},
                 {"flags", model.flags},
                 {"metadata", json{{"created_utc", creation_timestamp()},
                                   {"input_digest", input_digest}}}};
  write_file(path, doc.dump(2) + "\n");
}

SparseModel load_model(const std::string& path) {
  const json doc = parse_json_file(path);
  try {
    if (!doc.is_object() || !doc.contains("schema_version")) {
      throw DataError(path + ": missing schema_version");
    }
    const json& sv = doc["schema_version"];
    if (!sv.is_number_integer() || sv.get<int>() != kModelSchemaVersion) {
      throw DataError(path + ": unsupported schema_version (expected " +
                      std::to_string(kModelSchemaVersion) + ")");
    }
    SparseModel model;
    model.algorithm = doc.at("algorithm").get<std::string>();
    model.grid = parse_grid_json(doc.at("grid"));
    model.propagation = parse_propagation_json(doc.at("propagation"));
    const json& support = doc.at("support");
    if (!support.is_array()) {
      throw DataError(path + ": 'support' must be an array");
    }
    for (const json& entry : support) {
      if (!entry.is_object() || !entry.contains("index") || !entry["index"].is_number_integer()) {
        throw DataError(path + ": support entries need an integer 'index'");
      }
      model.support.push_back(entry["index"].get<int>());
      model.positions.push_back(parse_vec3(entry.at("center_xyz_m"), "center_xyz_m"));
      model.powers.push_back(require_number(entry.at("power_w"), "power_w"));
    }
    model.rho = require_number(doc.at("rho"), "rho");
    model.n_sources_requested = doc.at("n_sources_requested").get<int>();
    if (doc.contains("flags")) {
      model.flags = doc["flags"].get<std::vector<std::string>>();
    }
    model.validate();
    // Stored centers are redundant with the voxel index; a mismatch means the
    // file was edited inconsistently or belongs to a different grid.
    for (std::size_t j = 0; j < model.support.size(); ++j) {
      if (model.support[j] < 0) {
        continue;  // off-grid source: the position is authoritative
      }
      const Eigen::Vector3d center = voxel_center(model.grid, model.support[j]);
      for (int axis = 0; axis < 3; ++axis) {
        const double tol = 1e-9 * std::max(1.0, std::abs(center[axis]));
        if (std::abs(model.positions[j][axis] - center[axis]) > tol) {
          throw DataError(path + ": stored center disagrees with its voxel index");
        }
      }
    }
    return model;
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what());
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void save_report(const FitReport& report, const std::string& path) {
  // A genuine duration can never be bit-stable across runs, so reproducible
  // invocations serialize it as zero.
  const bool pinned = std::getenv("SOURCE_DATE_EPOCH") != nullptr;
  const json doc{{"residual_norm_per_stage", report.residual_norm_per_stage},
                 {"selected_errors", report.selected_errors},
                 {"candidates_evaluated", report.candidates_evaluated},
                 {"wall_time_s", pinned ? 0.0 : report.wall_time_s},
                 {"flags", report.flags}};
  write_file(path, doc.dump(2) + "\n");
}

void save_results_csv(const std::vector<EvalResult>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path);
  }
  out << "algorithm,n_sbl,separation_m,seed,rmse_db,n_test\n";
  char buf[64];
  for (const EvalResult& r : rows) {
    out << r.algorithm << ',' << r.n_sbl << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.separation_m);
    out << buf << ',' << r.seed << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.rmse_db);
    out << buf << ',' << r.n_test << '\n';
  }
  if (!out) {
    throw DataError("write failed: " + path);
  }
}

nlohmann::json grid_to_json(const VoxelGrid& grid) {
  return json{{"origin", {grid.origin.x(), grid.origin.y(), grid.origin.z()}},
              {"cell_size", {grid.cell_size.x(), grid.cell_size.y(), grid.cell_size.z()}},
              {"counts", {grid.counts[0], grid.counts[1], grid.counts[2]}}};
}

VoxelGrid parse_grid_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw UsageError("grid config must be a JSON object");
  }
  reject_unknown_keys(j, {"origin", "cell_size", "counts"}, "grid config");
  if (!j.contains("origin") || !j.contains("cell_size") || !j.contains("counts")) {
    throw UsageError("grid config needs 'origin', 'cell_size', and 'counts'");
  }
  VoxelGrid grid;
  grid.origin = parse_vec3(j["origin"], "grid origin");
  grid.cell_size = parse_vec3(j["cell_size"], "grid cell_size");
  const json& counts = j["counts"];
  if (!counts.is_array() || counts.size() != 3) {
    throw UsageError("grid counts must be a 3-element array");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (!counts[i].is_number_integer()) {
      throw UsageError("grid counts must be integers");
    }
    grid.counts[i] = counts[i].get<int>();
  }
  grid.validate();
  return grid;
}

VoxelGrid load_grid_file(const std::string& path) {
  const json doc = parse_json_file(path);
  // Accept both a bare grid object and a config wrapper {"grid": {...}, ...}.
  if (doc.is_object() && doc.contains("grid")) {
    return parse_grid_json(doc["grid"]);
  }
  return parse_grid_json(doc);
}

nlohmann::json propagation_to_json(const PropagationConfig& config) {
  return json{{"frequency_hz", config.frequency_hz},
              {"gain_tx", config.gain_tx},
              {"gain_rx", config.gain_rx}};
}

PropagationConfig parse_propagation_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw UsageError("propagation config must be a JSON object");
  }
  reject_unknown_keys(j, {"frequency_hz", "gain_tx", "gain_rx"}, "propagation config");
  PropagationConfig config;
  if (j.contains("frequency_hz")) {
    config.frequency_hz = require_number(j["frequency_hz"], "frequency_hz");
  }
  if (j.contains("gain_tx")) {
    config.gain_tx = require_number(j["gain_tx"], "gain_tx");
  }
  if (j.contains("gain_rx")) {
    config.gain_rx = require_number(j["gain_rx"], "gain_rx");
  }
  config.validate();
  return config;
}

SyntheticScene parse_scene_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw UsageError("scene config must be a JSON object");
  }
  reject_unknown_keys(j,
                      {"grid", "propagation", "true_sources", "noise_sigma_db", "noise_sigma_w",
                       "noise_mode", "seed", "path_loss_exponent"},
                      "scene config");
  SyntheticScene scene;
  try {
    if (!j.contains("grid")) {
      throw UsageError("scene config: missing 'grid'");
    }
    scene.grid = parse_grid_json(j["grid"]);
    if (j.contains("propagation")) {
      scene.propagation = parse_propagation_json(j["propagation"]);
    }
    if (!j.contains("true_sources") || !j["true_sources"].is_array() ||
        j["true_sources"].empty()) {
      throw UsageError("scene config: 'true_sources' must be a non-empty array");
    }
    for (const json& src : j["true_sources"]) {
      if (!src.is_object()) {
        throw UsageError("scene source must be an object");
      }
      reject_unknown_keys(src, {"index", "xyz", "power_dbm"}, "scene source");
      if (src.contains("index") == src.contains("xyz")) {
        throw UsageError("scene source needs exactly one of 'index' or 'xyz'");
      }
      int index = 0;
      if (src.contains("index")) {
        if (!src["index"].is_number_integer()) {
          throw UsageError("scene source index must be an integer");
        }
        index = src["index"].get<int>();
      } else {
        index = enclosing_voxel(scene.grid, parse_vec3(src["xyz"], "scene source xyz"));
      }
      if (!src.contains("power_dbm")) {
        throw UsageError("scene source needs 'power_dbm'");
      }
      const double power_w = dbm_to_watts(require_number(src["power_dbm"], "power_dbm"));
      scene.true_sources.emplace_back(index, power_w);
    }
    if (j.contains("noise_sigma_db")) {
      scene.noise_sigma_db = require_number(j["noise_sigma_db"], "noise_sigma_db");
    }
    if (j.contains("noise_sigma_w")) {
      scene.noise_sigma_w = require_number(j["noise_sigma_w"], "noise_sigma_w");
    }
    if (j.contains("noise_mode")) {
      const std::string mode = j["noise_mode"].get<std::string>();
      if (mode == "lognormal_db") {
        scene.noise_mode = NoiseMode::log_normal_db;
      } else if (mode == "awgn_watts") {
        scene.noise_mode = NoiseMode::awgn_watts;
      } else {
        throw UsageError("scene config: unknown noise_mode '" + mode + "'");
      }
    }
    if (j.contains("seed")) {
      if (!j["seed"].is_number_integer()) {
        throw UsageError("scene seed must be an integer");
      }
      scene.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("path_loss_exponent")) {
      scene.path_loss_exponent = require_number(j["path_loss_exponent"], "path_loss_exponent");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("scene config: ") + e.what());
  }
  scene.validate();
  return scene;
}

SyntheticScene load_scene_file(const std::string& path) {
  return parse_scene_json(parse_json_file(path));
}

}  // namespace gssbl
