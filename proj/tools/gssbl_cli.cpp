// SPDX-License-Identifier: Apache-2.0
//
// gssbl — sparse virtual-source recovery from RSS measurements.
//
// Subcommands:
//   fit            fit a model (gs-sbl | omp | fspl) to a measurement CSV
//   predict        evaluate a saved model at arbitrary points
//   synth          generate synthetic measurements from a scene description
//   experiment     run the sweep / altitude-separation studies
//   validate-model check a model file against every invariant
//
// Every error exits with a class-specific code (usage=2, data=3, numeric=4)
// and a single machine-parsable line on stderr.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gssbl/baselines.hpp"
#include "gssbl/data.hpp"
#include "gssbl/eval.hpp"
#include "gssbl/gs_sbl.hpp"
#include "gssbl/kernels.hpp"
#include "gssbl/persistence.hpp"

namespace {

using nlohmann::json;

double dbi_to_linear(double dbi) { return std::pow(10.0, dbi / 10.0); }

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw gssbl::DataError("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

// Optional JSON config file: {"grid": {...}, "propagation": {...},
// "priors": {"a", "b", "beta0", "iters", "tol"}}. Flags override any value
// it provides.
struct FileConfig {
  std::optional<gssbl::VoxelGrid> grid;
  std::optional<gssbl::PropagationConfig> propagation;
  std::optional<gssbl::SblPriors> priors;
};

FileConfig load_file_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file_bytes(path));
  } catch (const json::exception& e) {
    throw gssbl::DataError(path + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw gssbl::UsageError(path + ": config must be a JSON object");
  }
  FileConfig out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() == "grid") {
      out.grid = gssbl::parse_grid_json(it.value());
    } else if (it.key() == "propagation") {
      out.propagation = gssbl::parse_propagation_json(it.value());
    } else if (it.key() == "priors") {
      const json& p = it.value();
      if (!p.is_object()) {
        throw gssbl::UsageError(path + ": 'priors' must be a JSON object");
      }
      gssbl::SblPriors priors;
      for (auto pit = p.begin(); pit != p.end(); ++pit) {
        const std::string& k = pit.key();
        if (!pit.value().is_number()) {
          throw gssbl::UsageError(path + ": priors." + k + " must be a number");
        }
        if (k == "a") {
          priors.a = pit.value().get<double>();
        } else if (k == "b") {
          priors.b = pit.value().get<double>();
        } else if (k == "beta0") {
          priors.beta_init = pit.value().get<double>();
        } else if (k == "iters") {
          priors.max_iters = pit.value().get<int>();
        } else if (k == "tol") {
          priors.tol = pit.value().get<double>();
        } else {
          throw gssbl::UsageError(path + ": priors: unknown key '" + k + "'");
        }
      }
      priors.validate();
      out.priors = priors;
    } else {
      throw gssbl::UsageError(path + ": unknown key '" + it.key() + "'");
    }
  }
  return out;
}

// --- flag groups ------------------------------------------------------------

struct PropagationFlags {
  double freq_hz = 3.5e9;
  double gain_tx_dbi = 0.0;
  double gain_rx_dbi = 0.0;
  CLI::Option* freq_opt = nullptr;
  CLI::Option* tx_opt = nullptr;
  CLI::Option* rx_opt = nullptr;

  void add(CLI::App* cmd) {
    freq_opt = cmd->add_option("--freq-hz", freq_hz, "Carrier frequency [Hz]")
                   ->capture_default_str();
    tx_opt = cmd->add_option("--gain-tx-dbi", gain_tx_dbi, "Transmit antenna gain [dBi]")
                 ->capture_default_str();
    rx_opt = cmd->add_option("--gain-rx-dbi", gain_rx_dbi, "Receive antenna gain [dBi]")
                 ->capture_default_str();
  }

  gssbl::PropagationConfig resolve(const std::optional<gssbl::PropagationConfig>& base) const {
    gssbl::PropagationConfig cfg = base.value_or(gssbl::PropagationConfig{});
    if (freq_opt->count() > 0) {
      cfg.frequency_hz = freq_hz;
    }
    if (tx_opt->count() > 0) {
      cfg.gain_tx = dbi_to_linear(gain_tx_dbi);
    }
    if (rx_opt->count() > 0) {
      cfg.gain_rx = dbi_to_linear(gain_rx_dbi);
    }
    cfg.validate();
    return cfg;
  }
};

struct PriorFlags {
  double a = 0.05;
  double b = 0.05;
  double beta0 = 1e3;
  int iters = 10;
  double tol = 1e-8;
  CLI::Option* a_opt = nullptr;
  CLI::Option* b_opt = nullptr;
  CLI::Option* beta0_opt = nullptr;
  CLI::Option* iters_opt = nullptr;
  CLI::Option* tol_opt = nullptr;

  void add(CLI::App* cmd) {
    a_opt = cmd->add_option("--sbl-a", a, "Gamma prior shape")->capture_default_str();
    b_opt = cmd->add_option("--sbl-b", b, "Gamma prior rate")->capture_default_str();
    beta0_opt = cmd->add_option("--sbl-beta0", beta0, "Initial noise precision")
                    ->capture_default_str();
    iters_opt = cmd->add_option("--sbl-iters", iters, "Single-source iteration limit")
                    ->capture_default_str();
    tol_opt = cmd->add_option("--sbl-tol", tol, "Convergence tolerance on the posterior mean")
                  ->capture_default_str();
  }

  gssbl::SblPriors resolve(const std::optional<gssbl::SblPriors>& base) const {
    gssbl::SblPriors priors = base.value_or(gssbl::SblPriors{});
    if (a_opt->count() > 0) {
      priors.a = a;
    }
    if (b_opt->count() > 0) {
      priors.b = b;
    }
    if (beta0_opt->count() > 0) {
      priors.beta_init = beta0;
    }
    if (iters_opt->count() > 0) {
      priors.max_iters = iters;
    }
    if (tol_opt->count() > 0) {
      priors.tol = tol;
    }
    priors.validate();
    return priors;
  }
};

struct MappingFlags {
  gssbl::CsvColumnMapping mapping;

  void add(CLI::App* cmd) {
    cmd->add_option("--col-x", mapping.x, "CSV column holding x [m]")->capture_default_str();
    cmd->add_option("--col-y", mapping.y, "CSV column holding y [m]")->capture_default_str();
    cmd->add_option("--col-z", mapping.z, "CSV column holding z [m]")->capture_default_str();
    cmd->add_option("--col-rsrp", mapping.rsrp, "CSV column holding RSS [dBm]")
        ->capture_default_str();
  }
};

gssbl::VoxelGrid resolve_grid(const std::string& grid_path, const FileConfig& config) {
  if (!grid_path.empty()) {
    return gssbl::load_grid_file(grid_path);
  }
  if (config.grid.has_value()) {
    return *config.grid;
  }
  throw gssbl::UsageError("no voxel grid given (use --grid or a --config with a 'grid' entry)");
}

std::string algo_tag(const std::string& cli_name) {
  if (cli_name == "gs-sbl" || cli_name == "gs_sbl") {
    return gssbl::kAlgoGsSbl;
  }
  if (cli_name == "omp") {
    return gssbl::kAlgoOmp;
  }
  if (cli_name == "fspl") {
    return gssbl::kAlgoFspl;
  }
  throw gssbl::UsageError("unknown algorithm '" + cli_name + "'");
}

std::string default_report_path(const std::string& model_path) {
  const std::string suffix = ".rem.json";
  if (model_path.size() > suffix.size() &&
      model_path.compare(model_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return model_path.substr(0, model_path.size() - suffix.size()) + ".report.json";
  }
  return model_path + ".report.json";
}

// --- fit ---------------------------------------------------------------------

struct FitCmd {
  CLI::App* cmd = nullptr;
  std::string algo = "gs-sbl";
  std::string measurements;
  std::string grid_path;
  std::string config_path;
  std::string model_out = "model.rem.json";
  std::string report_out;
  int n_sources = 1;
  int threads = 0;
  std::vector<double> bs_location;
  CLI::Option* bs_opt = nullptr;
  PropagationFlags prop;
  PriorFlags priors;
  MappingFlags mapping;

  void add(CLI::App& app) {
    cmd = app.add_subcommand("fit", "Fit a sparse source model to measurements");
    cmd->add_option("--algo", algo, "Algorithm: gs-sbl | omp | fspl")
        ->check(CLI::IsMember({"gs-sbl", "gs_sbl", "omp", "fspl"}))
        ->capture_default_str();
    cmd->add_option("--measurements", measurements, "Measurement CSV")->required();
    cmd->add_option("--grid", grid_path, "Voxel grid JSON file");
    cmd->add_option("--config", config_path, "JSON config (grid/propagation/priors)");
    cmd->add_option("--n-sources", n_sources, "Requested sparsity level")->capture_default_str();
    bs_opt = cmd->add_option("--bs-location", bs_location,
                             "Base-station x,y,z [m] (fspl baseline only)")
                 ->delimiter(',')
                 ->expected(3);
    cmd->add_option("--model-out", model_out, "Output model path")->capture_default_str();
    cmd->add_option("--report-out", report_out, "Output report path (default: derived)");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    prop.add(cmd);
    priors.add(cmd);
    mapping.add(cmd);
  }

  void run() const {
    gssbl::set_num_threads(threads);
    const FileConfig config =
        config_path.empty() ? FileConfig{} : load_file_config(config_path);
    const gssbl::PropagationConfig pc = prop.resolve(config.propagation);
    const gssbl::MeasurementSet ms = gssbl::load_measurements_csv(measurements, mapping.mapping);
    const std::string digest = gssbl::digest_string(read_file_bytes(measurements));

    gssbl::SparseModel model;
    gssbl::FitReport report;
    const std::string tag = algo_tag(algo);
    if (tag == gssbl::kAlgoFspl) {
      if (bs_opt->count() == 0) {
        throw gssbl::UsageError("--bs-location is required for --algo fspl");
      }
      const Eigen::Vector3d bs(bs_location[0], bs_location[1], bs_location[2]);
      model = gssbl::fit_fspl_baseline(ms, bs, pc, &report);
    } else {
      const gssbl::VoxelGrid grid = resolve_grid(grid_path, config);
      const gssbl::SensingMatrix phi = gssbl::build_sensing_matrix(pc, grid, ms.points);
      if (tag == gssbl::kAlgoGsSbl) {
        std::tie(model, report) = gssbl::fit_gs_sbl(ms, phi, n_sources, priors.resolve(config.priors));
      } else {
        model = gssbl::fit_omp(ms, phi, n_sources, &report);
      }
    }

    const std::string report_path = report_out.empty() ? default_report_path(model_out) : report_out;
    gssbl::save_model(model, model_out, digest);
    gssbl::save_report(report, report_path);
    std::cout << "wrote " << model_out << " (" << model.support.size() << " source(s), rho="
              << format_g(model.rho) << ")\n";
    std::cout << "wrote " << report_path << "\n";
  }
};

// --- predict -----------------------------------------------------------------

struct PredictCmd {
  CLI::App* cmd = nullptr;
  std::string model_path;
  std::string points_path;
  std::string out_path = "predictions.csv";
  int threads = 0;
  MappingFlags mapping;

  void add(CLI::App& app) {
    cmd = app.add_subcommand("predict", "Evaluate a saved model at points from a CSV");
    cmd->add_option("--model", model_path, "Model file (.rem.json)")->required();
    cmd->add_option("--points", points_path, "CSV with point coordinates")->required();
    cmd->add_option("--out", out_path, "Output CSV")->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    mapping.add(cmd);
  }

  void run() const {
    gssbl::set_num_threads(threads);
    const gssbl::SparseModel model = gssbl::load_model(model_path);
    const std::vector<Eigen::Vector3d> points =
        gssbl::load_points_csv(points_path, mapping.mapping);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      throw gssbl::DataError("cannot write " + out_path);
    }
    out << mapping.mapping.x << ',' << mapping.mapping.y << ',' << mapping.mapping.z
        << ",pred_dbm\n";
    if (!points.empty()) {  // an empty points file yields a header-only table
      const Eigen::VectorXd pred = gssbl::predict(model, points);
      for (std::size_t i = 0; i < points.size(); ++i) {
        out << format_g(points[i].x()) << ',' << format_g(points[i].y()) << ','
            << format_g(points[i].z()) << ','
            << format_g(pred[static_cast<Eigen::Index>(i)]) << '\n';
      }
    }
    if (!out) {
      throw gssbl::DataError("write failed: " + out_path);
    }
    std::cout << "wrote " << out_path << " (" << points.size() << " point(s))\n";
  }
};

// --- synth ---------------------------------------------------------------------

struct PatternFlags {
  std::string pattern = "zigzag";
  std::vector<double> extent{0.0, 100.0, 0.0, 100.0};  // x0,x1,y0,y1
  std::vector<double> altitudes;
  int lines = 5;
  int points_per_line = 10;
  std::vector<double> box;  // x0,y0,z0,x1,y1,z1
  int count = 100;
  std::uint64_t pattern_seed = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--pattern", pattern, "Sample pattern: zigzag | uniform")
        ->check(CLI::IsMember({"zigzag", "uniform"}))
        ->capture_default_str();
    cmd->add_option("--extent", extent, "Zigzag extent x0,x1,y0,y1 [m]")
        ->delimiter(',')
        ->expected(4)
        ->capture_default_str();
    cmd->add_option("--altitudes", altitudes, "Zigzag altitudes z1,z2,... [m]")->delimiter(',');
    cmd->add_option("--lines", lines, "Zigzag sweep lines per altitude")->capture_default_str();
    cmd->add_option("--points-per-line", points_per_line, "Samples per sweep line")
        ->capture_default_str();
    cmd->add_option("--box", box, "Uniform box x0,y0,z0,x1,y1,z1 [m]")
        ->delimiter(',')
        ->expected(6);
    cmd->add_option("--count", count, "Uniform sample count")->capture_default_str();
    cmd->add_option("--pattern-seed", pattern_seed, "Uniform pattern RNG seed")
        ->capture_default_str();
  }

  std::vector<Eigen::Vector3d> make(const std::vector<double>& default_altitudes) const {
    if (pattern == "zigzag") {
      const std::vector<double>& alts = altitudes.empty() ? default_altitudes : altitudes;
      if (alts.empty()) {
        throw gssbl::UsageError("zigzag pattern needs --altitudes");
      }
      return gssbl::zigzag_pattern(extent[0], extent[1], extent[2], extent[3], alts, lines,
                                   points_per_line);
    }
    if (box.size() != 6) {
      throw gssbl::UsageError("uniform pattern needs --box x0,y0,z0,x1,y1,z1");
    }
    return gssbl::uniform_pattern(Eigen::Vector3d(box[0], box[1], box[2]),
                                  Eigen::Vector3d(box[3], box[4], box[5]), count, pattern_seed);
  }
};

struct SynthCmd {
  CLI::App* cmd = nullptr;
  std::string scene_path;
  std::string points_path;
  std::string out_path = "synthetic.csv";
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  PatternFlags pattern;
  MappingFlags mapping;

  void add(CLI::App& app) {
    cmd = app.add_subcommand("synth", "Generate synthetic measurements from a scene JSON");
    cmd->add_option("--scene", scene_path, "Scene JSON file")->required();
    cmd->add_option("--points", points_path, "Sample at points from this CSV instead");
    cmd->add_option("--out", out_path, "Output measurement CSV")->capture_default_str();
    seed_opt = cmd->add_option("--seed", seed, "Override the scene RNG seed");
    pattern.add(cmd);
    mapping.add(cmd);
  }

  void run() const {
    gssbl::SyntheticScene scene = gssbl::load_scene_file(scene_path);
    if (seed_opt->count() > 0) {
      scene.seed = seed;
    }
    std::vector<Eigen::Vector3d> points;
    if (!points_path.empty()) {
      points = gssbl::load_points_csv(points_path, mapping.mapping);
    } else {
      points = pattern.make({});
    }
    const gssbl::MeasurementSet ms = gssbl::generate_synthetic(scene, points);
    gssbl::save_measurements_csv(ms, out_path, mapping.mapping);
    std::cout << "wrote " << out_path << " (" << ms.size() << " sample(s))\n";
  }
};

// --- experiment ----------------------------------------------------------------

struct ExperimentCommon {
  std::string measurements;
  std::string scene_path;
  std::string grid_path;
  std::string config_path;
  std::string out_path;
  int threads = 0;
  int seeds = 1;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  double altitude_tolerance = 1.0;
  PropagationFlags prop;
  PriorFlags priors;
  MappingFlags mapping;
  PatternFlags pattern;

  void add(CLI::App* cmd, const std::string& default_out) {
    out_path = default_out;
    cmd->add_option("--measurements", measurements, "Measurement CSV (data mode)");
    cmd->add_option("--scene", scene_path, "Scene JSON (synthetic mode)");
    cmd->add_option("--grid", grid_path, "Recovery voxel grid JSON file");
    cmd->add_option("--config", config_path, "JSON config (grid/propagation/priors)");
    cmd->add_option("--out", out_path, "Output results CSV")->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    cmd->add_option("--seeds", seeds, "Synthetic mode: number of seed replicates")
        ->capture_default_str();
    seed_opt = cmd->add_option("--seed", seed, "Synthetic mode: base RNG seed");
    cmd->add_option("--altitude-tolerance", altitude_tolerance,
                    "Altitude split tolerance [m]")
        ->capture_default_str();
    prop.add(cmd);
    priors.add(cmd);
    mapping.add(cmd);
    pattern.add(cmd);
  }

  // One dataset per seed replicate: loaded once in data mode, regenerated per
  // seed in synthetic mode. `run_one` maps a dataset to result rows.
  template <typename F>
  std::vector<gssbl::EvalResult> for_each_dataset(const std::vector<double>& default_altitudes,
                                                  F&& run_one) const {
    if (measurements.empty() == scene_path.empty()) {
      throw gssbl::UsageError("give exactly one of --measurements or --scene");
    }
    std::vector<gssbl::EvalResult> rows;
    if (!measurements.empty()) {
      const gssbl::MeasurementSet ms = gssbl::load_measurements_csv(measurements, mapping.mapping);
      rows = run_one(ms);
      const std::uint64_t stamp = seed_opt->count() > 0 ? seed : 0;
      for (auto& r : rows) {
        r.seed = stamp;
      }
      return rows;
    }
    if (seeds < 1) {
      throw gssbl::UsageError("--seeds must be >= 1");
    }
    gssbl::SyntheticScene scene = gssbl::load_scene_file(scene_path);
    const std::uint64_t base = seed_opt->count() > 0 ? seed : scene.seed;
    const std::vector<Eigen::Vector3d> points = pattern.make(default_altitudes);
    for (int k = 0; k < seeds; ++k) {
      scene.seed = base + static_cast<std::uint64_t>(k);
      const gssbl::MeasurementSet ms = gssbl::generate_synthetic(scene, points);
      std::vector<gssbl::EvalResult> batch = run_one(ms);
      for (auto& r : batch) {
        r.seed = scene.seed;
        rows.push_back(std::move(r));
      }
    }
    return rows;
  }
};

struct SweepCmd {
  CLI::App* cmd = nullptr;
  ExperimentCommon common;
  std::vector<double> train_altitudes;
  std::vector<double> test_altitudes;
  int n_min = 1;
  int n_max = 7;

  void add(CLI::App* experiment) {
    cmd = experiment->add_subcommand("nsbl-sweep",
                                     "RMSE vs requested source count on altitude splits");
    common.add(cmd, "nsbl_sweep.csv");
    cmd->add_option("--train-altitudes", train_altitudes, "Training altitudes [m]")
        ->delimiter(',')
        ->required();
    cmd->add_option("--test-altitudes", test_altitudes, "Test altitudes [m] (one split each)")
        ->delimiter(',')
        ->required();
    cmd->add_option("--n-min", n_min, "Smallest source count")->capture_default_str();
    cmd->add_option("--n-max", n_max, "Largest source count")->capture_default_str();
  }

  void run() const {
    gssbl::set_num_threads(common.threads);
    const FileConfig config =
        common.config_path.empty() ? FileConfig{} : load_file_config(common.config_path);
    const gssbl::PropagationConfig pc = common.prop.resolve(config.propagation);
    const gssbl::SblPriors priors = common.priors.resolve(config.priors);
    const gssbl::VoxelGrid grid = resolve_grid(common.grid_path, config);

    std::set<double> all_z(train_altitudes.begin(), train_altitudes.end());
    all_z.insert(test_altitudes.begin(), test_altitudes.end());

    const std::vector<gssbl::EvalResult> rows = common.for_each_dataset(
        {all_z.begin(), all_z.end()}, [&](const gssbl::MeasurementSet& ms) {
          const gssbl::MeasurementSet train =
              gssbl::filter_by_altitude(ms, train_altitudes, common.altitude_tolerance);
          std::vector<gssbl::MeasurementSet> tests;
          tests.reserve(test_altitudes.size());
          for (const double z : test_altitudes) {
            tests.push_back(gssbl::filter_by_altitude(ms, {z}, common.altitude_tolerance));
          }
          return gssbl::run_nsbl_sweep(train, tests, grid, pc, n_min, n_max, priors);
        });
    gssbl::save_results_csv(rows, common.out_path);
    std::cout << "wrote " << common.out_path << " (" << rows.size() << " row(s))\n";
  }
};

struct SeparationCmd {
  CLI::App* cmd = nullptr;
  ExperimentCommon common;
  std::vector<double> separations{0.0, 10.0, 20.0};
  std::vector<std::string> algos{"gs-sbl", "omp", "fspl"};
  int n_sources = 1;
  std::vector<double> bs_location;
  CLI::Option* bs_opt = nullptr;

  void add(CLI::App* experiment) {
    cmd = experiment->add_subcommand("separation",
                                     "Altitude-generalization comparison of the algorithms");
    common.add(cmd, "separation.csv");
    // The pattern group already owns --altitudes; here the same list also
    // defines the altitude splits, so the flag becomes mandatory.
    cmd->get_option("--altitudes")->required();
    cmd->add_option("--separations", separations, "Train/test separations [m]")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--algos", algos, "Algorithms to compare")->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--n-sources", n_sources, "Requested sparsity level")->capture_default_str();
    bs_opt = cmd->add_option("--bs-location", bs_location, "Base-station x,y,z [m] (for fspl)")
                 ->delimiter(',')
                 ->expected(3);
  }

  void run() const {
    gssbl::set_num_threads(common.threads);
    const FileConfig config =
        common.config_path.empty() ? FileConfig{} : load_file_config(common.config_path);
    const gssbl::PropagationConfig pc = common.prop.resolve(config.propagation);
    const gssbl::SblPriors priors = common.priors.resolve(config.priors);
    const gssbl::VoxelGrid grid = resolve_grid(common.grid_path, config);

    std::vector<std::string> tags;
    tags.reserve(algos.size());
    for (const std::string& a : algos) {
      tags.push_back(algo_tag(a));
    }
    Eigen::Vector3d bs = Eigen::Vector3d::Zero();
    const bool wants_fspl =
        std::find(tags.begin(), tags.end(), gssbl::kAlgoFspl) != tags.end();
    if (wants_fspl) {
      if (bs_opt->count() == 0) {
        throw gssbl::UsageError("--bs-location is required when fspl is compared");
      }
      bs = Eigen::Vector3d(bs_location[0], bs_location[1], bs_location[2]);
    }

    const std::vector<double>& split_altitudes = common.pattern.altitudes;
    const std::vector<gssbl::EvalResult> rows = common.for_each_dataset(
        split_altitudes, [&](const gssbl::MeasurementSet& ms) {
          return gssbl::run_separation_comparison(ms, split_altitudes, separations, tags, grid,
                                                  pc, priors, n_sources, bs,
                                                  common.altitude_tolerance);
        });
    gssbl::save_results_csv(rows, common.out_path);
    std::cout << "wrote " << common.out_path << " (" << rows.size() << " row(s))\n";
  }
};

// --- validate-model --------------------------------------------------------------

struct ValidateCmd {
  CLI::App* cmd = nullptr;
  std::string model_path;

  void add(CLI::App& app) {
    cmd = app.add_subcommand("validate-model", "Check a model file against every invariant");
    cmd->add_option("--model", model_path, "Model file (.rem.json)")->required();
  }

  void run() const {
    const gssbl::SparseModel model = gssbl::load_model(model_path);
    std::cout << "valid: " << model.algorithm << " model with " << model.support.size()
              << " source(s), rho=" << format_g(model.rho) << "\n";
  }
};

const char* class_name(gssbl::ErrorClass cls) {
  switch (cls) {
    case gssbl::ErrorClass::usage:
      return "usage";
    case gssbl::ErrorClass::data:
      return "data";
    case gssbl::ErrorClass::numeric:
      return "numeric";
  }
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse virtual-source recovery from RSS measurements"};
  app.require_subcommand(1);

  FitCmd fit;
  PredictCmd predict;
  SynthCmd synth;
  ValidateCmd validate;
  fit.add(app);
  predict.add(app);
  synth.add(app);
  CLI::App* experiment =
      app.add_subcommand("experiment", "Run the sweep / altitude-separation studies");
  experiment->require_subcommand(1);
  SweepCmd sweep;
  SeparationCmd separation;
  sweep.add(experiment);
  separation.add(experiment);
  validate.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(gssbl::ErrorClass::usage);
  }

  try {
    if (fit.cmd->parsed()) {
      fit.run();
    } else if (predict.cmd->parsed()) {
      predict.run();
    } else if (synth.cmd->parsed()) {
      synth.run();
    } else if (experiment->parsed()) {
      if (sweep.cmd->parsed()) {
        sweep.run();
      } else {
        separation.run();
      }
    } else if (validate.cmd->parsed()) {
      validate.run();
    }
  } catch (const gssbl::Error& e) {
    std::cerr << "error: " << class_name(e.error_class()) << ": " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
