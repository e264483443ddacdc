#include "srt/oracle.hpp"

#include <cmath>
#include <numbers>

#include "srt/errors.hpp"

namespace srt::oracle {

namespace {

void require_nodes(std::size_t n, const char *name) {
  if (n < 4) throw ValidationError(std::string(name) + " must be at least 4");
}

double bin_lookup(const std::vector<double> &values, std::size_t n_a, std::size_t n_b, double ta, double tb) {
  if (!(ta >= 0.0) || !(tb >= 0.0) || ta >= static_cast<double>(n_a) || tb >= static_cast<double>(n_b)) return 0.0;
  return values[static_cast<std::size_t>(ta) + n_a * static_cast<std::size_t>(tb)];
}

} // namespace

PhantomKind phantom_kind_from_string(const std::string &name) {
  if (name == "uniform") return PhantomKind::uniform;
  if (name == "gaussian") return PhantomKind::gaussian;
  if (name == "ball") return PhantomKind::ball;
  if (name == "single_voxel") return PhantomKind::single_voxel;
  throw ValidationError("unknown phantom kind '" + name + "'");
}

Image3D make_phantom(const Phantom &phantom, const VoxelGrid3D &grid) {
  if ((phantom.kind == PhantomKind::gaussian || phantom.kind == PhantomKind::ball) && !(phantom.width > 0.0)) {
    throw ValidationError("phantom width must be positive");
  }
  if (!std::isfinite(phantom.amplitude)) throw ValidationError("phantom amplitude must be finite");
  std::vector<double> values(grid.voxel_count(), 0.0);

  if (phantom.kind == PhantomKind::single_voxel) {
    const auto flat = grid.containing(phantom.center);
    if (!flat) throw ValidationError("single_voxel phantom center lies outside the grid");
    values[*flat] = phantom.amplitude;
    return Image3D(grid, std::move(values));
  }

  const double inv_two_var = 1.0 / (2.0 * phantom.width * phantom.width);
  for (std::size_t k = 0; k < grid.m_z(); ++k) {
    for (std::size_t j = 0; j < grid.m_s(); ++j) {
      for (std::size_t i = 0; i < grid.m_s(); ++i) {
        const Vec3 p = grid.center(i, j, k);
        const double dx = p.x - phantom.center.x;
        const double dy = p.y - phantom.center.y;
        const double dz = p.z - phantom.center.z;
        const double r2 = dx * dx + dy * dy + dz * dz;
        double v = 0.0;
        switch (phantom.kind) {
        case PhantomKind::uniform: v = phantom.amplitude; break;
        case PhantomKind::gaussian: v = phantom.amplitude * std::exp(-r2 * inv_two_var); break;
        case PhantomKind::ball: v = r2 <= phantom.width * phantom.width ? phantom.amplitude : 0.0; break;
        case PhantomKind::single_voxel: break;
        }
        values[grid.flatten(i, j, k)] = v;
      }
    }
  }
  return Image3D(grid, std::move(values));
}

double sample(const Image3D &f, const Vec3 &p) noexcept {
  const auto flat = f.grid().containing(p);
  return flat ? f.values()[*flat] : 0.0;
}

double direct_srt(const Image3D &f, const Vec3 &center, double radius, std::size_t n_theta, std::size_t n_phi) {
  require_nodes(n_theta, "n_theta");
  require_nodes(n_phi, "n_phi");
  if (!(radius >= 0.0)) throw ValidationError("radius must be non-negative");
  if (radius == 0.0) return 0.0;
  const double dtheta = std::numbers::pi / static_cast<double>(n_theta);
  const double dphi = 2.0 * std::numbers::pi / static_cast<double>(n_phi);
  std::vector<double> cos_phi(n_phi), sin_phi(n_phi);
  for (std::size_t q = 0; q < n_phi; ++q) {
    const double phi = (static_cast<double>(q) + 0.5) * dphi;
    cos_phi[q] = std::cos(phi);
    sin_phi[q] = std::sin(phi);
  }
  double total = 0.0;
  for (std::size_t t = 0; t < n_theta; ++t) {
    const double theta = (static_cast<double>(t) + 0.5) * dtheta;
    const double st = std::sin(theta);
    const double z = center.z + radius * std::cos(theta);
    double ring = 0.0;
    for (std::size_t q = 0; q < n_phi; ++q) {
      ring += sample(f, Vec3{center.x + radius * st * cos_phi[q], center.y + radius * st * sin_phi[q], z});
    }
    total += ring * st;
  }
  return total * radius * radius * dtheta * dphi;
}

Sinogram direct_sinogram(const Image3D &f, const ApertureGeometry &geometry, std::size_t n_theta,
                         std::size_t n_phi) {
  const SinogramShape shape = SinogramShape::of(geometry);
  std::vector<double> out(shape.size());
  const auto total = static_cast<std::ptrdiff_t>(shape.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t n = 0; n < total; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const std::size_t l = un % shape.n_radii;
    const std::size_t h = (un / shape.n_radii) % shape.n_heights;
    const std::size_t c = un / shape.block_size();
    const auto &col = geometry.column(c);
    out[un] = direct_srt(f, Vec3{col.center_xy.x, col.center_xy.y, col.heights[h]}, geometry.radii()[l], n_theta,
                         n_phi);
  }
  return Sinogram(shape, std::move(out));
}

double Plane2D::sample(double a, double b) const noexcept {
  return bin_lookup(values, n_a, n_b, (a - origin_a) / spacing_a + 0.5, (b - origin_b) / spacing_b + 0.5);
}

Plane2D layer(const Image3D &f, std::size_t k) {
  const auto &g = f.grid();
  if (k >= g.m_z()) throw IndexError("layer index outside grid");
  Plane2D p;
  p.n_a = p.n_b = g.m_s();
  p.spacing_a = p.spacing_b = g.spacing();
  p.origin_a = g.origin().x;
  p.origin_b = g.origin().y;
  const auto begin = f.values().begin() + static_cast<std::ptrdiff_t>(k * g.plane_size());
  p.values.assign(begin, begin + static_cast<std::ptrdiff_t>(g.plane_size()));
  return p;
}

double direct_crt_circle(const Plane2D &f2d, Vec2 center, double radius, std::size_t n_phi) {
  require_nodes(n_phi, "n_phi");
  const double dphi = 2.0 * std::numbers::pi / static_cast<double>(n_phi);
  double total = 0.0;
  for (std::size_t q = 0; q < n_phi; ++q) {
    const double phi = (static_cast<double>(q) + 0.5) * dphi;
    total += f2d.sample(center.x + radius * std::cos(phi), center.y + radius * std::sin(phi));
  }
  return total * radius * dphi;
}

double direct_crt_halfcircle(const Plane2D &f2d, double center_b, double radius, std::size_t n_theta) {
  require_nodes(n_theta, "n_theta");
  const double dtheta = std::numbers::pi / static_cast<double>(n_theta);
  double total = 0.0;
  for (std::size_t q = 0; q < n_theta; ++q) {
    const double theta = (static_cast<double>(q) + 0.5) * dtheta;
    total += f2d.sample(radius * std::sin(theta), center_b + radius * std::cos(theta));
  }
  return total * radius * dtheta;
}

} // namespace srt::oracle
