#include "srt/crt.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>

#include "srt/errors.hpp"

namespace srt {

namespace {

using RowEntries = std::vector<std::pair<std::size_t, double>>;

void validate_radii(std::span<const double> radii) {
  if (radii.empty()) throw ValidationError("radii must not be empty");
  for (std::size_t l = 0; l < radii.size(); ++l) {
    if (!std::isfinite(radii[l]) || radii[l] < 0.0) throw ValidationError("radii must be finite and non-negative");
    if (l > 0 && !(radii[l] > radii[l - 1])) throw ValidationError("radii not strictly increasing");
  }
}

std::optional<std::size_t> bin_of(double coord, double first_center, double width, std::size_t count) {
  const double t = (coord - first_center) / width + 0.5;
  if (!(t >= 0.0) || t >= static_cast<double>(count)) return std::nullopt;
  return static_cast<std::size_t>(std::floor(t));
}

// Rows are sampled independently and appended in row order, so the
// compressed matrix does not depend on how the row loop is scheduled.
template <class RowFn>
SparseOperator assemble(std::size_t n_rows, std::size_t n_cols, std::size_t n_samples_hint, RowFn &&row_fn,
                        std::string description) {
  std::vector<RowEntries> rows(n_rows);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(n_rows); ++r) {
    row_fn(static_cast<std::size_t>(r), rows[static_cast<std::size_t>(r)]);
  }
  TripletBuilder builder(n_rows, n_cols);
  builder.reserve(n_samples_hint);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (const auto &[col, w] : rows[r]) builder.add(r, col, w);
    RowEntries().swap(rows[r]);
  }
  return builder.compress(std::move(description));
}

} // namespace

std::size_t full_circle_nodes(double radius, double spacing, const SamplingParams &sampling) {
  const double n = std::ceil(2.0 * std::numbers::pi * radius * sampling.points_per_voxel_arc / spacing);
  return std::max(sampling.min_points_per_arc, static_cast<std::size_t>(n));
}

std::size_t half_circle_nodes(double radius, double bin, const SamplingParams &sampling) {
  const double n = std::ceil(std::numbers::pi * radius * sampling.points_per_voxel_arc / bin);
  return std::max(sampling.min_points_per_arc, static_cast<std::size_t>(n));
}

double radius_bin_width(std::span<const double> radii, double z_spacing) {
  validate_radii(radii);
  if (radii.size() == 1) return z_spacing;
  const double step = (radii.back() - radii.front()) / static_cast<double>(radii.size() - 1);
  for (std::size_t l = 0; l < radii.size(); ++l) {
    const double expected = radii.front() + step * static_cast<double>(l);
    if (std::abs(radii[l] - expected) > 1e-6 * step) {
      throw ValidationError("radii must be uniformly spaced for the z-ell transform");
    }
  }
  return step;
}

SparseOperator build_xy_crt(const VoxelGrid3D &grid, Vec2 center_xy, std::span<const double> radii,
                            const SamplingParams &sampling) {
  validate_radii(radii);
  sampling.validate();
  const std::size_t n_l = radii.size();
  const double h = grid.spacing();
  const double ox = grid.origin().x;
  const double oy = grid.origin().y;

  std::size_t hint = 0;
  for (double ell : radii) hint += full_circle_nodes(ell, h, sampling);

  auto row = [&](std::size_t l, RowEntries &out) {
    const double ell = radii[l];
    if (ell == 0.0) return;
    const std::size_t n_phi = full_circle_nodes(ell, h, sampling);
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(n_phi);
    const double weight = ell * dphi;
    out.reserve(n_phi);
    for (std::size_t q = 0; q < n_phi; ++q) {
      const double phi = (static_cast<double>(q) + 0.5) * dphi;
      const auto i = grid.containing_xy(center_xy.x + ell * std::cos(phi), ox);
      const auto j = grid.containing_xy(center_xy.y + ell * std::sin(phi), oy);
      if (i && j) out.emplace_back(*i + grid.m_s() * *j, weight);
    }
  };

  std::ostringstream desc;
  desc << "xy-crt center=(" << center_xy.x << "," << center_xy.y << ") m_s=" << grid.m_s() << " n_l=" << n_l
       << " eta=" << sampling.points_per_voxel_arc;
  return assemble(n_l, grid.plane_size(), hint, row, desc.str());
}

SparseOperator build_zl_crt(std::size_t m_z, double z_spacing, double z_origin, std::span<const double> radii,
                            std::span<const double> heights, const SamplingParams &sampling) {
  if (m_z == 0) throw ValidationError("m_z must be positive");
  if (!(z_spacing > 0.0)) throw ValidationError("z_spacing must be positive");
  if (heights.empty()) throw ValidationError("heights must not be empty");
  for (std::size_t h = 1; h < heights.size(); ++h) {
    if (!(heights[h] > heights[h - 1])) throw ValidationError("heights not strictly increasing");
  }
  sampling.validate();
  const double bin = radius_bin_width(radii, z_spacing);
  const std::size_t n_l = radii.size();
  const std::size_t n_h = heights.size();
  const double node_scale = std::min(z_spacing, bin);
  const double ell_first = radii.front();

  std::size_t hint = 0;
  for (double ell : radii) hint += n_h * half_circle_nodes(ell, node_scale, sampling);

  auto row = [&](std::size_t r, RowEntries &out) {
    const std::size_t l = r % n_l;
    const std::size_t h = r / n_l;
    const double ell = radii[l];
    if (ell == 0.0) return;
    const std::size_t n_theta = half_circle_nodes(ell, node_scale, sampling);
    const double dtheta = std::numbers::pi / static_cast<double>(n_theta);
    const double weight = ell * dtheta;
    out.reserve(n_theta);
    for (std::size_t q = 0; q < n_theta; ++q) {
      const double theta = (static_cast<double>(q) + 0.5) * dtheta;
      const auto zb = bin_of(heights[h] + ell * std::cos(theta), z_origin, z_spacing, m_z);
      const auto lb = bin_of(ell * std::sin(theta), ell_first, bin, n_l);
      if (zb && lb) out.emplace_back(*lb + n_l * *zb, weight);
    }
  };

  std::ostringstream desc;
  desc << "zl-crt m_z=" << m_z << " n_l=" << n_l << " n_h=" << n_h << " eta=" << sampling.points_per_voxel_arc;
  return assemble(n_l * n_h, n_l * m_z, hint, row, desc.str());
}

} // namespace srt
