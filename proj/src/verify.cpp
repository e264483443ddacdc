#include "srt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "srt/crt.hpp"
#include "srt/errors.hpp"
#include "srt/oracle.hpp"

namespace srt::verify {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> gaussian_vector(std::size_t n, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double &x : v) x = normal(rng);
  return v;
}

Vec3 grid_middle(const VoxelGrid3D &g) {
  const Vec3 lo = g.center(0, 0, 0);
  const Vec3 hi = g.center(g.m_s() - 1, g.m_s() - 1, g.m_z() - 1);
  return Vec3{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y), 0.5 * (lo.z + hi.z)};
}

} // namespace

double dot_test(const LinearMap &map, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto x = gaussian_vector(map.n_in, rng);
  const auto y = gaussian_vector(map.n_out, rng);
  std::vector<double> ax(map.n_out), aty(map.n_in);
  map.apply(x, ax);
  map.apply_adjoint(y, aty);
  const double scale = std::sqrt(dot(ax, ax)) * std::sqrt(dot(y, y));
  if (scale == 0.0) return 0.0;
  return std::abs(dot(ax, y) - dot(x, aty)) / scale;
}

double dot_test(const ColumnOperator &op, std::uint64_t seed) {
  LinearMap map;
  map.n_in = op.grid().voxel_count();
  map.n_out = op.block_size();
  map.apply = [&op](std::span<const double> x, std::span<double> y) { op.forward(x, y); };
  map.apply_adjoint = [&op](std::span<const double> y, std::span<double> x) { op.adjoint(y, x); };
  return dot_test(map, seed);
}

double relative_rmse(std::span<const double> value, std::span<const double> reference) {
  if (value.size() != reference.size()) throw DimensionError("relative_rmse: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const double d = value[i] - reference[i];
    num += d * d;
    den += reference[i] * reference[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

OracleComparison compare_with_oracle(const ColumnOperator &op, const Image3D &f, double min_radius,
                                     std::size_t n_theta, std::size_t n_phi) {
  const auto block = forward_column(op, f);
  const auto &col = op.column();
  const auto &radii = op.radii();
  const std::size_t n_l = radii.size();
  OracleComparison out;
  for (std::size_t h = 0; h < col.heights.size(); ++h) {
    for (std::size_t l = 0; l < n_l; ++l) {
      if (radii[l] < min_radius) continue;
      out.factorized.push_back(block[l + n_l * h]);
      out.direct.push_back(
          oracle::direct_srt(f, Vec3{col.center_xy.x, col.center_xy.y, col.heights[h]}, radii[l], n_theta, n_phi));
    }
  }
  out.compared = out.direct.size();
  out.relative_rmse = relative_rmse(out.factorized, out.direct);
  return out;
}

SphereAreaResult sphere_area(const VoxelGrid3D &grid, const SensorColumn &column, std::span<const double> radii,
                             const SamplingParams &sampling, double min_radius) {
  const auto op = ColumnOperator::build(grid, column, radii, sampling);
  const Image3D ones(grid, std::vector<double>(grid.voxel_count(), 1.0));
  const auto block = forward_column(op, ones);

  const double h = grid.spacing();
  const double x_lo = grid.origin().x - 0.5 * h;
  const double y_lo = grid.origin().y - 0.5 * h;
  const double z_lo = grid.origin().z - 0.5 * h;
  const double xy_hi_off = h * static_cast<double>(grid.m_s());
  const double z_hi = z_lo + h * static_cast<double>(grid.m_z());

  SphereAreaResult out;
  const std::size_t n_l = radii.size();
  for (std::size_t k = 0; k < column.heights.size(); ++k) {
    for (std::size_t l = 0; l < n_l; ++l) {
      const double ell = radii[l];
      if (ell < min_radius) continue;
      const Vec2 c = column.center_xy;
      const bool inside = c.x - ell > x_lo && c.x + ell < x_lo + xy_hi_off && c.y - ell > y_lo &&
                          c.y + ell < y_lo + xy_hi_off && column.heights[k] - ell > z_lo &&
                          column.heights[k] + ell < z_hi;
      if (!inside) continue;
      const double exact = 4.0 * std::numbers::pi * ell * ell;
      out.max_relative_error = std::max(out.max_relative_error, std::abs(block[l + n_l * k] - exact) / exact);
      ++out.compared;
    }
  }
  return out;
}

CheckResult make_check(std::string name, double measured, double threshold, bool below) {
  CheckResult r{std::move(name), measured, threshold, below, false};
  r.passed = std::isfinite(measured) && (below ? measured <= threshold : measured >= threshold);
  return r;
}

std::vector<CheckResult> run_all(const ScanConfig &config, std::uint64_t seed) {
  std::vector<CheckResult> checks;
  const auto &grid = config.grid;
  const double h = grid.spacing();
  const auto op = ApertureOperator::build(grid, config.aperture, config.sampling);
  const auto map = as_linear_map(op);

  checks.push_back(make_check("adjoint dot test (relative)", dot_test(map, seed), 1e-12));

  const Vec3 mid = grid_middle(grid);
  const double width = std::max(2.0, static_cast<double>(grid.m_s()) / 8.0) * h;
  const Image3D gaussian = oracle::make_phantom({oracle::PhantomKind::gaussian, mid, width, 1.0}, grid);
  const auto cmp = compare_with_oracle(op.column(0), gaussian, 4.0 * h);
  checks.push_back(make_check("oracle agreement, column 0 (relative RMSE)", cmp.relative_rmse, 0.02));

  // Sphere-area check uses its own column at the grid center so the shells
  // fit inside the grid.
  const double half_xy = 0.5 * h * static_cast<double>(grid.m_s());
  const double half_z = 0.5 * h * static_cast<double>(grid.m_z());
  const double reach = std::min(half_xy, half_z) - h;
  std::vector<double> radii;
  for (double ell = 0.0; ell <= reach; ell += h) radii.push_back(ell);
  if (radii.size() >= 2) {
    const auto area = sphere_area(grid, SensorColumn(Vec2{mid.x, mid.y}, {mid.z}), radii, config.sampling, 4.0 * h);
    if (area.compared > 0) {
      checks.push_back(make_check("sphere area 4*pi*l^2 (max relative error)", area.max_relative_error, 0.02));
    }
  }

  std::mt19937_64 rng(seed + 1);
  const Sinogram y = forward_aperture(op, gaussian);
  std::vector<double> f0 = gaussian_vector(grid.voxel_count(), rng);
  for (double &v : f0) v *= 0.1;
  const auto matched = gradient_check(map, f0, y.values(), 4, seed + 2);
  checks.push_back(make_check("gradient check, matched adjoint", matched.max_discrepancy, 1e-6));
  const auto perturbed = gradient_check(with_scaled_adjoint(map, 1.01), f0, y.values(), 4, seed + 2);
  checks.push_back(make_check("gradient check, 1% perturbed adjoint (detects)", perturbed.max_discrepancy, 1e-3,
                              false));
  return checks;
}

} // namespace srt::verify
