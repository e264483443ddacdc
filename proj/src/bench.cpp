#include "srt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "srt/errors.hpp"
#include "srt/oracle.hpp"

namespace srt::bench {

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("power-law fit needs at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("power-law fit needs positive samples");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    const double dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ValidationError("power-law fit needs distinct x values");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

ScanConfig scaled_config(const ScanConfig &base, std::size_t m_s) {
  if (m_s == 0) throw ValidationError("benchmark size must be positive");
  const auto &g = base.grid;
  const double scale = static_cast<double>(m_s) / static_cast<double>(g.m_s());
  const double fov = g.spacing() * static_cast<double>(g.m_s());
  const double spacing = fov / static_cast<double>(m_s);
  const std::size_t m_z = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(g.m_z() * scale)));
  const Vec3 mid{g.origin().x + 0.5 * g.spacing() * (g.m_s() - 1.0), g.origin().y + 0.5 * g.spacing() * (g.m_s() - 1.0),
                 g.origin().z + 0.5 * g.spacing() * (g.m_z() - 1.0)};
  const VoxelGrid3D grid(m_s, m_z, spacing,
                         Vec3{mid.x - 0.5 * spacing * (m_s - 1.0), mid.y - 0.5 * spacing * (m_s - 1.0),
                              mid.z - 0.5 * spacing * (m_z - 1.0)});

  const auto &ap = base.aperture;
  const Vec2 c0 = ap.column(0).center_xy;
  const double cyl = std::hypot(c0.x - mid.x, c0.y - mid.y);
  const auto n_c = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ap.n_columns() * scale)));
  const auto n_h = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ap.n_heights() * scale)));

  double h_lo = ap.heights().front();
  double h_hi = ap.heights().back();
  if (ap.n_heights() == 1) {
    const double fov_z = g.spacing() * static_cast<double>(g.m_z());
    h_lo = mid.z - 0.25 * fov_z;
    h_hi = mid.z + 0.25 * fov_z;
  }
  std::vector<double> heights(n_h);
  for (std::size_t k = 0; k < n_h; ++k) {
    heights[k] = n_h == 1 ? 0.5 * (h_lo + h_hi) : h_lo + (h_hi - h_lo) * static_cast<double>(k) / (n_h - 1.0);
  }

  const double ell_max = cyl + fov / std::numbers::sqrt2;
  const auto n_l = static_cast<std::size_t>(std::ceil(ell_max / spacing)) + 1;
  std::vector<double> radii(n_l);
  for (std::size_t l = 0; l < n_l; ++l) radii[l] = spacing * static_cast<double>(l);

  std::vector<SensorColumn> columns;
  for (std::size_t c = 0; c < n_c; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(n_c);
    columns.emplace_back(Vec2{mid.x + cyl * std::cos(angle), mid.y + cyl * std::sin(angle)}, heights);
  }
  return ScanConfig{grid, ApertureGeometry(std::move(columns), std::move(radii)), base.sampling};
}

double time_call(const std::function<void()> &fn, double min_seconds, int batches) {
  using clock = std::chrono::steady_clock;
  double best = std::numeric_limits<double>::infinity();
  for (int b = 0; b < batches; ++b) {
    int calls = 0;
    const auto start = clock::now();
    double elapsed = 0.0;
    do {
      fn();
      ++calls;
      elapsed = std::chrono::duration<double>(clock::now() - start).count();
    } while (elapsed < min_seconds);
    best = std::min(best, elapsed / calls);
  }
  return best;
}

BenchPoint measure(const ScanConfig &config, double min_seconds) {
  using clock = std::chrono::steady_clock;
  BenchPoint p;
  p.m_s = config.grid.m_s();
  p.m_z = config.grid.m_z();
  p.voxels = config.grid.voxel_count();
  p.n_columns = config.aperture.n_columns();
  p.n_heights = config.aperture.n_heights();
  p.n_radii = config.aperture.n_radii();

  const auto t0 = clock::now();
  const auto op = ApertureOperator::build(config.grid, config.aperture, config.sampling);
  p.build_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  p.nnz_a34 = op.shared_a34().nnz();
  p.nnz_a12 = op.total_nnz() - p.nnz_a34;
  p.bytes = op.shared_a34().storage_bytes();
  for (std::size_t c = 0; c < op.n_columns(); ++c) p.bytes += op.column(c).a12().storage_bytes();

  // Smooth phantom filling a good part of the field of view.
  const auto &g = config.grid;
  const double fov = g.spacing() * static_cast<double>(g.m_s());
  const Vec3 mid = g.center(0, 0, 0);
  const Vec3 far = g.center(g.m_s() - 1, g.m_s() - 1, g.m_z() - 1);
  const oracle::Phantom phantom{oracle::PhantomKind::gaussian,
                                Vec3{0.5 * (mid.x + far.x), 0.5 * (mid.y + far.y), 0.5 * (mid.z + far.z)},
                                0.15 * fov, 1.0};
  const Image3D f = oracle::make_phantom(phantom, g);

  std::vector<double> sinogram(op.sinogram_shape().size());
  p.aperture_seconds = time_call([&] { op.forward(f.values(), sinogram); }, min_seconds);
  std::vector<double> block(op.column(0).block_size());
  p.column_seconds = time_call([&] { op.column(0).forward(f.values(), block); }, min_seconds);
  return p;
}

BenchSummary run(const ScanConfig &base, std::span<const std::size_t> sizes, double min_seconds) {
  BenchSummary summary;
  std::vector<double> m, t_ap, t_col, nnz;
  for (std::size_t m_s : sizes) {
    const auto p = measure(scaled_config(base, m_s), min_seconds);
    m.push_back(static_cast<double>(p.voxels));
    t_ap.push_back(p.aperture_seconds);
    t_col.push_back(p.column_seconds);
    nnz.push_back(static_cast<double>(p.nnz_a12 + p.nnz_a34));
    summary.points.push_back(p);
  }
  if (summary.points.size() >= 2) {
    summary.aperture_time = fit_power_law(m, t_ap);
    summary.column_time = fit_power_law(m, t_col);
    summary.nnz = fit_power_law(m, nnz);
  }
  return summary;
}

} // namespace srt::bench
