// SPDX-License-Identifier: Apache-2.0
#include "gssbl/data.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "gssbl/errors.hpp"

namespace gssbl {
namespace {

// Smallest representable signal level; the generator clips here so that every
// synthetic sample stays strictly positive in Watts (required for the dBm
// representation to exist).
constexpr double kWattsFloor = 1e-30;

std::vector<double> distinct_altitudes(const std::vector<Eigen::Vector3d>& points) {
  std::set<double> zs;
  for (const auto& p : points) {
    zs.insert(p.z());
  }
  return {zs.begin(), zs.end()};
}

// Strict full-string parse; trailing garbage or an empty field fails.
bool parse_double(const std::string& field, double& out) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  if (end == begin) {
    return false;
  }
  while (*end == ' ' || *end == '\t') {
    ++end;
  }
  if (*end != '\0') {
    return false;
  }
  out = value;
  return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
}

int column_index(const std::vector<std::string>& header, const std::string& name,
                 const std::string& path) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return static_cast<int>(i);
    }
  }
  throw DataError("missing column '" + name + "' in " + path);
}

// numpy-style linspace: n - 1 equal steps with the endpoint forced exact.
std::vector<double> linspace(double start, double stop, int n) {
  std::vector<double> values(static_cast<std::size_t>(n));
  if (n == 1) {
    values[0] = start;
    return values;
  }
  const double step = (stop - start) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    values[static_cast<std::size_t>(i)] = start + static_cast<double>(i) * step;
  }
  values[static_cast<std::size_t>(n - 1)] = stop;
  return values;
}

struct ParsedCsv {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> rsrp_dbm;  // empty when rsrp was not requested
  int dropped_rows = 0;
};

ParsedCsv parse_csv(const std::string& path, const CsvColumnMapping& mapping, bool want_rsrp) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("empty file: " + path);
  }
  strip_cr(line);
  const std::vector<std::string> header = split_csv_line(line);
  const int ix = column_index(header, mapping.x, path);
  const int iy = column_index(header, mapping.y, path);
  const int iz = column_index(header, mapping.z, path);
  const int ir = want_rsrp ? column_index(header, mapping.rsrp, path) : -1;

  ParsedCsv out;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      ++out.dropped_rows;
      continue;
    }
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double r = 0.0;
    const bool ok = parse_double(fields[static_cast<std::size_t>(ix)], x) &&
                    parse_double(fields[static_cast<std::size_t>(iy)], y) &&
                    parse_double(fields[static_cast<std::size_t>(iz)], z) &&
                    (!want_rsrp || parse_double(fields[static_cast<std::size_t>(ir)], r));
    if (!ok || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) ||
        (want_rsrp && !std::isfinite(r))) {
      ++out.dropped_rows;
      continue;
    }
    out.points.emplace_back(x, y, z);
    if (want_rsrp) {
      out.rsrp_dbm.push_back(r);
    }
  }
  return out;
}

}  // namespace

void MeasurementSet::validate() const {
  const std::size_t m = points.size();
  if (m == 0) {
    throw DataError("measurement set is empty");
  }
  if (static_cast<std::size_t>(rsrp_dbm.size()) != m ||
      static_cast<std::size_t>(rss_w.size()) != m) {
    throw DataError("measurement set arrays disagree in length");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!points[i].allFinite()) {
      throw DataError("non-finite sample coordinates");
    }
    const double w = rss_w[static_cast<Eigen::Index>(i)];
    const double dbm = rsrp_dbm[static_cast<Eigen::Index>(i)];
    if (!std::isfinite(dbm) || !std::isfinite(w) || !(w > 0.0)) {
      throw DataError("non-finite or non-positive RSS value");
    }
    if (std::abs(w - dbm_to_watts(dbm)) > 1e-9 * w) {
      throw DataError("dBm/Watt representations disagree");
    }
  }
}

MeasurementSet make_measurement_set(std::vector<Eigen::Vector3d> points,
                                    const Eigen::VectorXd& rss_w) {
  MeasurementSet ms;
  ms.rsrp_dbm.resize(rss_w.size());
  ms.rss_w.resize(rss_w.size());
  for (Eigen::Index i = 0; i < rss_w.size(); ++i) {
    ms.rsrp_dbm[i] = watts_to_dbm(rss_w[i]);  // throws NumericError for w <= 0
    // The dBm field is authoritative (it is what the CSV stores), so the
    // Watt field is always its exact image; a set therefore survives a
    // save/load cycle bit for bit in every field.
    ms.rss_w[i] = dbm_to_watts(ms.rsrp_dbm[i]);
  }
  ms.points = std::move(points);
  ms.metadata.altitude_tags = distinct_altitudes(ms.points);
  ms.validate();
  return ms;
}

MeasurementSet load_measurements_csv(const std::string& path, const CsvColumnMapping& mapping) {
  ParsedCsv parsed = parse_csv(path, mapping, /*want_rsrp=*/true);
  if (parsed.points.empty()) {
    throw DataError("no valid data rows in " + path);
  }
  MeasurementSet ms;
  ms.points = std::move(parsed.points);
  const Eigen::Index m = static_cast<Eigen::Index>(parsed.rsrp_dbm.size());
  ms.rsrp_dbm.resize(m);
  ms.rss_w.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    ms.rsrp_dbm[i] = parsed.rsrp_dbm[static_cast<std::size_t>(i)];
    ms.rss_w[i] = dbm_to_watts(ms.rsrp_dbm[i]);  // dBm column is authoritative
  }
  ms.metadata.altitude_tags = distinct_altitudes(ms.points);
  ms.metadata.source_file = path;
  ms.metadata.dropped_rows = parsed.dropped_rows;
  ms.validate();
  return ms;
}

void save_measurements_csv(const MeasurementSet& ms, const std::string& path,
                           const CsvColumnMapping& mapping) {
  ms.validate();
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path);
  }
  out << mapping.x << ',' << mapping.y << ',' << mapping.z << ',' << mapping.rsrp << '\n';
  char buf[32];
  for (int i = 0; i < ms.size(); ++i) {
    const auto& p = ms.points[static_cast<std::size_t>(i)];
    const double cols[4] = {p.x(), p.y(), p.z(), ms.rsrp_dbm[i]};
    for (int c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", cols[c]);
      out << buf << (c < 3 ? ',' : '\n');
    }
  }
  if (!out) {
    throw DataError("write failed: " + path);
  }
}

std::vector<Eigen::Vector3d> load_points_csv(const std::string& path,
                                             const CsvColumnMapping& mapping) {
  return parse_csv(path, mapping, /*want_rsrp=*/false).points;
}

MeasurementSet filter_by_altitude(const MeasurementSet& ms, const std::vector<double>& z_values,
                                  double tolerance_m) {
  if (!(tolerance_m >= 0.0) || !std::isfinite(tolerance_m)) {
    throw UsageError("altitude tolerance must be >= 0");
  }
  ms.validate();
  std::vector<Eigen::Index> keep;
  for (int i = 0; i < ms.size(); ++i) {
    const double z = ms.points[static_cast<std::size_t>(i)].z();
    for (const double target : z_values) {
      if (std::abs(z - target) <= tolerance_m) {
        keep.push_back(i);
        break;
      }
    }
  }
  if (keep.empty()) {
    throw DataError("altitude filter removed every sample");
  }
  MeasurementSet out;
  out.points.reserve(keep.size());
  out.rsrp_dbm.resize(static_cast<Eigen::Index>(keep.size()));
  out.rss_w.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.points.push_back(ms.points[static_cast<std::size_t>(keep[k])]);
    out.rsrp_dbm[static_cast<Eigen::Index>(k)] = ms.rsrp_dbm[keep[k]];
    out.rss_w[static_cast<Eigen::Index>(k)] = ms.rss_w[keep[k]];
  }
  out.metadata.altitude_tags = distinct_altitudes(out.points);
  out.metadata.source_file = ms.metadata.source_file;
  out.metadata.dropped_rows = ms.metadata.dropped_rows;
  return out;
}

MeasurementSet generate_synthetic(const SyntheticScene& scene,
                                  const std::vector<Eigen::Vector3d>& sample_points) {
  scene.validate();
  if (sample_points.empty()) {
    throw UsageError("generate_synthetic: no sample points");
  }
  for (const auto& p : sample_points) {
    if (!p.allFinite()) {
      throw UsageError("generate_synthetic: non-finite sample point");
    }
  }

  const bool free_space = scene.path_loss_exponent == 2.0;
  const double lambda = scene.propagation.wavelength();
  // Gt * Gr * (lambda / 4pi)^2 * d^-eta reduces to fspl_gain at eta = 2.
  const double amplitude = scene.propagation.gain_tx * scene.propagation.gain_rx *
                           (lambda / (4.0 * std::numbers::pi)) * (lambda / (4.0 * std::numbers::pi));

  std::vector<Eigen::Vector3d> centers;
  centers.reserve(scene.true_sources.size());
  for (const auto& [index, power] : scene.true_sources) {
    (void)power;
    centers.push_back(voxel_center(scene.grid, index));
  }

  std::mt19937_64 engine(scene.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  const bool lognormal = scene.noise_mode == NoiseMode::log_normal_db;
  const double sigma = lognormal ? scene.noise_sigma_db : scene.noise_sigma_w;

  Eigen::VectorXd rss(static_cast<Eigen::Index>(sample_points.size()));
  for (std::size_t i = 0; i < sample_points.size(); ++i) {
    double signal = 0.0;
    for (std::size_t s = 0; s < centers.size(); ++s) {
      double d = (sample_points[i] - centers[s]).norm();
      if (d < kMinDistance) {
        d = kMinDistance;
      }
      const double gain = free_space ? fspl_gain(scene.propagation, d)
                                     : amplitude * std::pow(d, -scene.path_loss_exponent);
      signal += scene.true_sources[s].second * gain;
    }
    if (sigma > 0.0) {  // a noiseless scene draws nothing from the engine
      const double n = unit_normal(engine);
      if (lognormal) {
        signal *= std::pow(10.0, sigma * n / 10.0);
      } else {
        signal += sigma * n;
      }
    }
    rss[static_cast<Eigen::Index>(i)] = signal > kWattsFloor ? signal : kWattsFloor;
  }
  return make_measurement_set(sample_points, rss);
}

void SyntheticScene::validate() const {
  grid.validate();
  propagation.validate();
  for (const auto& [index, power] : true_sources) {
    if (index < 0 || index >= grid.num_voxels()) {
      throw UsageError("scene source voxel index out of range");
    }
    if (!(power > 0.0) || !std::isfinite(power)) {
      throw UsageError("scene source power must be finite and > 0");
    }
  }
  if (!(noise_sigma_db >= 0.0) || !std::isfinite(noise_sigma_db)) {
    throw UsageError("noise_sigma_db must be finite and >= 0");
  }
  if (!(noise_sigma_w >= 0.0) || !std::isfinite(noise_sigma_w)) {
    throw UsageError("noise_sigma_w must be finite and >= 0");
  }
  if (!(path_loss_exponent > 0.0) || !std::isfinite(path_loss_exponent)) {
    throw UsageError("path_loss_exponent must be finite and > 0");
  }
}

std::vector<Eigen::Vector3d> zigzag_pattern(double x0, double x1, double y0, double y1,
                                            const std::vector<double>& altitudes, int lines,
                                            int points_per_line) {
  if (lines < 1 || points_per_line < 1) {
    throw UsageError("zigzag_pattern: lines and points_per_line must be >= 1");
  }
  if (altitudes.empty()) {
    throw UsageError("zigzag_pattern: at least one altitude required");
  }
  for (const double v : {x0, x1, y0, y1}) {
    if (!std::isfinite(v)) {
      throw UsageError("zigzag_pattern: non-finite extent");
    }
  }
  const std::vector<double> xs = linspace(x0, x1, points_per_line);
  const std::vector<double> ys = linspace(y0, y1, lines);

  std::vector<Eigen::Vector3d> points;
  points.reserve(altitudes.size() * static_cast<std::size_t>(lines) *
                 static_cast<std::size_t>(points_per_line));
  for (const double z : altitudes) {
    if (!std::isfinite(z)) {
      throw UsageError("zigzag_pattern: non-finite altitude");
    }
    for (int li = 0; li < lines; ++li) {
      const double y = ys[static_cast<std::size_t>(li)];
      if (li % 2 == 0) {
        for (int pi = 0; pi < points_per_line; ++pi) {
          points.emplace_back(xs[static_cast<std::size_t>(pi)], y, z);
        }
      } else {  // return sweep
        for (int pi = points_per_line - 1; pi >= 0; --pi) {
          points.emplace_back(xs[static_cast<std::size_t>(pi)], y, z);
        }
      }
    }
  }
  return points;
}

std::vector<Eigen::Vector3d> uniform_pattern(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                                             int count, std::uint64_t seed) {
  if (count < 0) {
    throw UsageError("uniform_pattern: count must be >= 0");
  }
  if (!lo.allFinite() || !hi.allFinite() || !(lo.array() <= hi.array()).all()) {
    throw UsageError("uniform_pattern: box must be finite with lo <= hi");
  }
  std::mt19937_64 engine(seed);
  std::vector<Eigen::Vector3d> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Eigen::Vector3d p;
    for (int axis = 0; axis < 3; ++axis) {
      if (lo[axis] == hi[axis]) {  // degenerate axis: no draw
        p[axis] = lo[axis];
      } else {
        p[axis] = std::uniform_real_distribution<double>(lo[axis], hi[axis])(engine);
      }
    }
    points.push_back(p);
  }
  return points;
}

}  // namespace gssbl
