#include "srt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "srt/errors.hpp"

namespace srt {

namespace {

std::optional<std::size_t> cell_of(double coord, double first_center, double spacing,
                                   std::size_t count) noexcept {
  const double t = (coord - first_center) / spacing + 0.5;
  if (!(t >= 0.0) || t >= static_cast<double>(count)) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(std::floor(t));
}

void require_strictly_increasing(const std::vector<double> &v, const std::string &field) {
  for (std::size_t n = 1; n < v.size(); ++n) {
    if (!(v[n] > v[n - 1])) {
      throw ValidationError(field + " not strictly increasing");
    }
  }
}

void require_finite(const std::vector<double> &v, const std::string &what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw ValidationError(what + " contains a non-finite value");
    }
  }
}

} // namespace

VoxelGrid3D::VoxelGrid3D(std::size_t m_s, std::size_t m_z, double spacing, Vec3 origin)
    : m_s_(m_s), m_z_(m_z), spacing_(spacing), origin_(origin) {
  if (m_s == 0) throw ValidationError("grid.m_s must be positive");
  if (m_z == 0) throw ValidationError("grid.m_z must be positive");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ValidationError("grid.spacing must be positive");
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y) || !std::isfinite(origin.z)) {
    throw ValidationError("grid.origin must be finite");
  }
  constexpr auto max = std::numeric_limits<std::size_t>::max();
  if (m_s > max / m_s || m_s * m_s > max / m_z) {
    throw ValidationError("grid voxel count overflows the index type");
  }
}

VoxelGrid3D VoxelGrid3D::centered(std::size_t m_s, std::size_t m_z, double spacing) {
  const double hs = -0.5 * spacing * (static_cast<double>(m_s) - 1.0);
  const double hz = -0.5 * spacing * (static_cast<double>(m_z) - 1.0);
  return VoxelGrid3D(m_s, m_z, spacing, Vec3{hs, hs, hz});
}

Vec3 VoxelGrid3D::center(std::size_t i, std::size_t j, std::size_t k) const noexcept {
  return Vec3{origin_.x + spacing_ * static_cast<double>(i), origin_.y + spacing_ * static_cast<double>(j),
              origin_.z + spacing_ * static_cast<double>(k)};
}

std::size_t VoxelGrid3D::flatten(std::size_t i, std::size_t j, std::size_t k) const {
  if (i >= m_s_ || j >= m_s_ || k >= m_z_) {
    throw IndexError("voxel index (" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) +
                     ") outside grid");
  }
  return i + m_s_ * (j + m_s_ * k);
}

VoxelIndex VoxelGrid3D::unflatten(std::size_t flat) const {
  if (flat >= voxel_count()) {
    throw IndexError("flat voxel index " + std::to_string(flat) + " outside grid");
  }
  const std::size_t plane = plane_size();
  return VoxelIndex{flat % m_s_, (flat % plane) / m_s_, flat / plane};
}

std::optional<std::size_t> VoxelGrid3D::containing_xy(double coord, double axis_origin) const noexcept {
  return cell_of(coord, axis_origin, spacing_, m_s_);
}

std::optional<std::size_t> VoxelGrid3D::containing_z(double z) const noexcept {
  return cell_of(z, origin_.z, spacing_, m_z_);
}

std::optional<std::size_t> VoxelGrid3D::containing(const Vec3 &p) const noexcept {
  const auto i = cell_of(p.x, origin_.x, spacing_, m_s_);
  const auto j = cell_of(p.y, origin_.y, spacing_, m_s_);
  const auto k = cell_of(p.z, origin_.z, spacing_, m_z_);
  if (!i || !j || !k) return std::nullopt;
  return *i + m_s_ * (*j + m_s_ * *k);
}

std::size_t flatten_index(std::size_t i, std::size_t j, std::size_t k, const VoxelGrid3D &grid) {
  return grid.flatten(i, j, k);
}

VoxelIndex unflatten_index(std::size_t flat, const VoxelGrid3D &grid) { return grid.unflatten(flat); }

SensorColumn::SensorColumn(Vec2 center, std::vector<double> h) : center_xy(center), heights(std::move(h)) {
  if (heights.empty()) throw ValidationError("aperture.heights must not be empty");
  if (!std::isfinite(center_xy.x) || !std::isfinite(center_xy.y)) {
    throw ValidationError("aperture column center must be finite");
  }
  require_finite(heights, "aperture.heights");
  require_strictly_increasing(heights, "heights");
}

ApertureGeometry::ApertureGeometry(std::vector<SensorColumn> columns, std::vector<double> radii)
    : columns_(std::move(columns)), radii_(std::move(radii)) {
  if (columns_.empty()) throw ValidationError("aperture.columns must not be empty");
  if (radii_.empty()) throw ValidationError("aperture.radii must not be empty");
  require_finite(radii_, "aperture.radii");
  if (radii_.front() < 0.0) throw ValidationError("aperture.radii must be non-negative");
  require_strictly_increasing(radii_, "radii");
  for (const auto &c : columns_) {
    if (c.heights != columns_.front().heights) {
      throw ValidationError("aperture.columns must all share the same heights");
    }
  }
}

ApertureGeometry ApertureGeometry::cylinder(double cylinder_radius, std::size_t n_columns,
                                            std::vector<double> heights, std::vector<double> radii) {
  if (!(cylinder_radius >= 0.0)) throw ValidationError("aperture.cylinder_radius must be non-negative");
  if (n_columns == 0) throw ValidationError("aperture.n_columns must be positive");
  std::vector<SensorColumn> columns;
  columns.reserve(n_columns);
  for (std::size_t c = 0; c < n_columns; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(n_columns);
    columns.emplace_back(Vec2{cylinder_radius * std::cos(angle), cylinder_radius * std::sin(angle)}, heights);
  }
  return ApertureGeometry(std::move(columns), std::move(radii));
}

void SamplingParams::validate() const {
  if (!(points_per_voxel_arc > 0.0) || !std::isfinite(points_per_voxel_arc)) {
    throw ValidationError("sampling.points_per_voxel_arc must be positive");
  }
  if (min_points_per_arc == 0) throw ValidationError("sampling.min_points_per_arc must be positive");
}

Image3D::Image3D(VoxelGrid3D grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.voxel_count()) {
    throw DimensionError("image has " + std::to_string(values_.size()) + " values, grid expects " +
                         std::to_string(grid_.voxel_count()));
  }
  require_finite(values_, "image");
}

Image3D Image3D::zeros(const VoxelGrid3D &grid) {
  return Image3D(grid, std::vector<double>(grid.voxel_count(), 0.0));
}

SinogramShape SinogramShape::of(const ApertureGeometry &geometry) noexcept {
  return SinogramShape{geometry.n_columns(), geometry.n_heights(), geometry.n_radii()};
}

Sinogram::Sinogram(SinogramShape shape, std::vector<double> values) : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.size()) {
    throw DimensionError("sinogram has " + std::to_string(values_.size()) + " values, geometry expects " +
                         std::to_string(shape_.size()));
  }
  require_finite(values_, "sinogram");
}

Sinogram Sinogram::zeros(SinogramShape shape) { return Sinogram(shape, std::vector<double>(shape.size(), 0.0)); }

// ---------------------------------------------------------------------------
// Configuration

namespace {

using nlohmann::json;

const json &require(const json &node, const char *key, const std::string &path) {
  if (!node.is_object() || !node.contains(key)) {
    throw ValidationError("missing field " + path + "." + key);
  }
  return node.at(key);
}

double number(const json &node, const std::string &field) {
  if (!node.is_number()) throw ValidationError(field + " must be a number");
  return node.get<double>();
}

std::size_t count(const json &node, const std::string &field) {
  if (!node.is_number_integer()) throw ValidationError(field + " must be an integer");
  const auto v = node.get<long long>();
  if (v <= 0) throw ValidationError(field + " must be positive");
  return static_cast<std::size_t>(v);
}

std::vector<double> number_list(const json &node, const std::string &field) {
  if (!node.is_array()) throw ValidationError(field + " must be a list");
  std::vector<double> out;
  for (std::size_t n = 0; n < node.size(); ++n) {
    out.push_back(number(node[n], field + "[" + std::to_string(n) + "]"));
  }
  return out;
}

Vec2 vec2(const json &node, const std::string &field) {
  const auto v = number_list(node, field);
  if (v.size() != 2) throw ValidationError(field + " must have 2 entries");
  return Vec2{v[0], v[1]};
}

std::vector<double> regular_list(std::size_t n, double start, double step) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = start + step * static_cast<double>(k);
  return out;
}

// Runs the constructor inside a field context so invariant violations name the field.
template <class Fn> auto with_field(const std::string &field, Fn &&fn) {
  try {
    return fn();
  } catch (const ValidationError &e) {
    const std::string what = e.what();
    if (what.find(field) != std::string::npos) throw;
    throw ValidationError(field + ": " + what);
  }
}

std::vector<double> parse_heights(const json &ap) {
  if (ap.contains("heights")) return number_list(ap.at("heights"), "aperture.heights");
  const auto n = count(require(ap, "n_heights", "aperture"), "aperture.n_heights");
  const double pitch = number(require(ap, "height_pitch", "aperture"), "aperture.height_pitch");
  const double start = number(require(ap, "height_origin", "aperture"), "aperture.height_origin");
  if (!(pitch > 0.0)) throw ValidationError("aperture.height_pitch must be positive");
  return regular_list(n, start, pitch);
}

std::vector<double> parse_radii(const json &ap) {
  if (ap.contains("radii")) return number_list(ap.at("radii"), "aperture.radii");
  const auto n = count(require(ap, "n_radii", "aperture"), "aperture.n_radii");
  const double step = number(require(ap, "radius_spacing", "aperture"), "aperture.radius_spacing");
  const double start = ap.contains("radius_origin") ? number(ap.at("radius_origin"), "aperture.radius_origin") : 0.0;
  if (!(step > 0.0)) throw ValidationError("aperture.radius_spacing must be positive");
  return regular_list(n, start, step);
}

} // namespace

ScanConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config must be an object");

  const json &g = require(doc, "grid", "config");
  const auto m_s = count(require(g, "m_s", "grid"), "grid.m_s");
  const auto m_z = count(require(g, "m_z", "grid"), "grid.m_z");
  const double spacing = number(require(g, "spacing", "grid"), "grid.spacing");
  if (!(spacing > 0.0)) throw ValidationError("grid.spacing must be positive");
  VoxelGrid3D grid = VoxelGrid3D::centered(m_s, m_z, spacing);
  if (g.contains("origin")) {
    const auto o = number_list(g.at("origin"), "grid.origin");
    if (o.size() != 3) throw ValidationError("grid.origin must have 3 entries");
    grid = VoxelGrid3D(m_s, m_z, spacing, Vec3{o[0], o[1], o[2]});
  }

  const json &ap = require(doc, "aperture", "config");
  std::vector<double> radii = parse_radii(ap);

  std::optional<ApertureGeometry> aperture;
  if (ap.contains("columns")) {
    const json &cols = ap.at("columns");
    if (!cols.is_array() || cols.empty()) throw ValidationError("aperture.columns must be a non-empty list");
    std::optional<std::vector<double>> shared;
    if (ap.contains("heights") || ap.contains("n_heights")) shared = parse_heights(ap);
    std::vector<SensorColumn> columns;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::string field = "aperture.columns[" + std::to_string(c) + "]";
      const Vec2 center = vec2(require(cols[c], "center", field), field + ".center");
      std::vector<double> heights;
      if (cols[c].contains("heights")) {
        heights = number_list(cols[c].at("heights"), field + ".heights");
      } else if (shared) {
        heights = *shared;
      } else {
        throw ValidationError("missing field " + field + ".heights");
      }
      columns.push_back(with_field(field, [&] { return SensorColumn(center, std::move(heights)); }));
    }
    aperture.emplace(with_field("aperture", [&] { return ApertureGeometry(std::move(columns), std::move(radii)); }));
  } else {
    const double cyl = number(require(ap, "cylinder_radius", "aperture"), "aperture.cylinder_radius");
    const auto n_columns = count(require(ap, "n_columns", "aperture"), "aperture.n_columns");
    auto heights = parse_heights(ap);
    aperture.emplace(with_field("aperture", [&] {
      return ApertureGeometry::cylinder(cyl, n_columns, std::move(heights), std::move(radii));
    }));
  }

  SamplingParams sampling;
  if (doc.contains("sampling")) {
    const json &s = doc.at("sampling");
    if (s.contains("points_per_voxel_arc")) {
      sampling.points_per_voxel_arc = number(s.at("points_per_voxel_arc"), "sampling.points_per_voxel_arc");
    }
    if (s.contains("min_points_per_arc")) {
      sampling.min_points_per_arc = count(s.at("min_points_per_arc"), "sampling.min_points_per_arc");
    }
  }
  sampling.validate();

  return ScanConfig{grid, std::move(*aperture), sampling};
}

ScanConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

} // namespace srt
