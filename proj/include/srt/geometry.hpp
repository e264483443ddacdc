#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace srt {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2 &, const Vec2 &) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Vec3 &, const Vec3 &) = default;
};

struct VoxelIndex {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;
  friend bool operator==(const VoxelIndex &, const VoxelIndex &) = default;
};

// Cartesian m_s x m_s x m_z grid of cubic voxels. Lengths are in meters.
//
// Voxel (i,j,k) is centered at origin + spacing*(i,j,k) and stored at
// flat = i + m_s*j + m_s^2*k, so an image is an (m_s^2 x m_z) column-major
// matrix whose columns are the z-layers.
class VoxelGrid3D {
public:
  VoxelGrid3D(std::size_t m_s, std::size_t m_z, double spacing, Vec3 origin);

  // Grid whose voxel centers are symmetric about (0,0,0).
  static VoxelGrid3D centered(std::size_t m_s, std::size_t m_z, double spacing);

  std::size_t m_s() const noexcept { return m_s_; }
  std::size_t m_z() const noexcept { return m_z_; }
  double spacing() const noexcept { return spacing_; }
  const Vec3 &origin() const noexcept { return origin_; }

  std::size_t plane_size() const noexcept { return m_s_ * m_s_; }
  std::size_t voxel_count() const noexcept { return m_s_ * m_s_ * m_z_; }

  Vec3 center(std::size_t i, std::size_t j, std::size_t k) const noexcept;

  std::size_t flatten(std::size_t i, std::size_t j, std::size_t k) const;
  VoxelIndex unflatten(std::size_t flat) const;

  // Index of the voxel whose cell contains a coordinate along one axis,
  // or nullopt outside the grid. Cells are half-open [c - h/2, c + h/2).
  std::optional<std::size_t> containing_xy(double coord, double axis_origin) const noexcept;
  std::optional<std::size_t> containing_z(double z) const noexcept;
  std::optional<std::size_t> containing(const Vec3 &p) const noexcept; // flat index

  friend bool operator==(const VoxelGrid3D &, const VoxelGrid3D &) = default;

private:
  std::size_t m_s_;
  std::size_t m_z_;
  double spacing_;
  Vec3 origin_;
};

std::size_t flatten_index(std::size_t i, std::size_t j, std::size_t k, const VoxelGrid3D &grid);
VoxelIndex unflatten_index(std::size_t flat, const VoxelGrid3D &grid);

// A vertical line of sensors at (r1, r2) with strictly increasing heights r3^h.
struct SensorColumn {
  SensorColumn(Vec2 center_xy, std::vector<double> heights);

  Vec2 center_xy;
  std::vector<double> heights;
};

// Cylindrical aperture: N_c sensor columns sharing one height list and one
// radius list. Sharing is what lets all columns reuse a single z-ell matrix.
class ApertureGeometry {
public:
  ApertureGeometry(std::vector<SensorColumn> columns, std::vector<double> radii);

  // N_c columns equally spaced in angle on a cylinder of the given radius.
  static ApertureGeometry cylinder(double cylinder_radius, std::size_t n_columns,
                                   std::vector<double> heights, std::vector<double> radii);

  const std::vector<SensorColumn> &columns() const noexcept { return columns_; }
  const SensorColumn &column(std::size_t c) const { return columns_.at(c); }
  const std::vector<double> &radii() const noexcept { return radii_; }
  const std::vector<double> &heights() const noexcept { return columns_.front().heights; }

  std::size_t n_columns() const noexcept { return columns_.size(); }
  std::size_t n_heights() const noexcept { return heights().size(); }
  std::size_t n_radii() const noexcept { return radii_.size(); }
  std::size_t measurements_per_column() const noexcept { return n_heights() * n_radii(); }
  std::size_t measurement_count() const noexcept { return n_columns() * measurements_per_column(); }

private:
  std::vector<SensorColumn> columns_;
  std::vector<double> radii_;
};

// Quadrature density used when building the CRT matrices.
struct SamplingParams {
  double points_per_voxel_arc = 4.0;  // samples per voxel-length of arc
  std::size_t min_points_per_arc = 8; // floor on samples per circle

  void validate() const;
};

class Image3D {
public:
  Image3D(VoxelGrid3D grid, std::vector<double> values);
  static Image3D zeros(const VoxelGrid3D &grid);

  const VoxelGrid3D &grid() const noexcept { return grid_; }
  const std::vector<double> &values() const noexcept { return values_; }
  std::vector<double> &mutable_values() noexcept { return values_; }

  double at(std::size_t i, std::size_t j, std::size_t k) const { return values_[grid_.flatten(i, j, k)]; }

private:
  VoxelGrid3D grid_;
  std::vector<double> values_;
};

struct SinogramShape {
  std::size_t n_columns = 0;
  std::size_t n_heights = 0;
  std::size_t n_radii = 0;

  static SinogramShape of(const ApertureGeometry &geometry) noexcept;
  std::size_t block_size() const noexcept { return n_heights * n_radii; }
  std::size_t size() const noexcept { return n_columns * n_heights * n_radii; }
  friend bool operator==(const SinogramShape &, const SinogramShape &) = default;
};

// SRT measurements, radius fastest: flat = l + N_l*h + N_l*N_h*c.
class Sinogram {
public:
  Sinogram(SinogramShape shape, std::vector<double> values);
  static Sinogram zeros(SinogramShape shape);

  const SinogramShape &shape() const noexcept { return shape_; }
  const std::vector<double> &values() const noexcept { return values_; }
  std::vector<double> &mutable_values() noexcept { return values_; }

  std::size_t flat(std::size_t c, std::size_t h, std::size_t l) const noexcept {
    return l + shape_.n_radii * (h + shape_.n_heights * c);
  }
  double at(std::size_t c, std::size_t h, std::size_t l) const { return values_[flat(c, h, l)]; }

private:
  SinogramShape shape_;
  std::vector<double> values_;
};

struct ScanConfig {
  VoxelGrid3D grid;
  ApertureGeometry aperture;
  SamplingParams sampling;
};

// Parses a JSON scan description:
//   grid:     m_s, m_z, spacing, [origin]
//   aperture: cylinder_radius + n_columns | columns[{center, [heights]}]
//             heights[] | n_heights + height_pitch + height_origin
//             radii[]   | n_radii + radius_spacing [+ radius_origin]
//   sampling: [points_per_voxel_arc], [min_points_per_arc]
// Throws ValidationError naming the offending field.
ScanConfig parse_config(std::string_view text);
ScanConfig load_config(const std::string &path);

} // namespace srt
