#pragma once

#include <string>
#include <vector>

#include "srt/geometry.hpp"

// Brute-force references and analytic phantoms. Nothing here is used by the
// factorized operator; these exist to check it.
namespace srt::oracle {

enum class PhantomKind { uniform, gaussian, ball, single_voxel };

PhantomKind phantom_kind_from_string(const std::string &name);

struct Phantom {
  PhantomKind kind = PhantomKind::uniform;
  Vec3 center{};
  double width = 1.0; // Gaussian standard deviation or ball radius, meters
  double amplitude = 1.0;
};

// Voxelizes by evaluating at voxel centers. single_voxel sets only the voxel
// containing the center.
Image3D make_phantom(const Phantom &phantom, const VoxelGrid3D &grid);

// Piecewise-constant lookup: value of the voxel containing p, zero outside.
double sample(const Image3D &f, const Vec3 &p) noexcept;

// Midpoint double sum of f(r + ell*u(theta,phi)) * ell^2 sin(theta) dphi dtheta.
double direct_srt(const Image3D &f, const Vec3 &center, double radius, std::size_t n_theta, std::size_t n_phi);

// direct_srt for every (column, height, radius) of an aperture, in sinogram order.
Sinogram direct_sinogram(const Image3D &f, const ApertureGeometry &geometry, std::size_t n_theta,
                         std::size_t n_phi);

// Regular 2-D array of bins; bin (a,b) is centered at
// (origin_a + a*spacing_a, origin_b + b*spacing_b), stored a-fastest.
struct Plane2D {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double spacing_a = 1.0;
  double spacing_b = 1.0;
  double origin_a = 0.0;
  double origin_b = 0.0;
  std::vector<double> values;

  double sample(double a, double b) const noexcept;
};

// One z-layer of an image as a Plane2D over (x, y).
Plane2D layer(const Image3D &f, std::size_t k);

// Arc integral of f2d over the full circle about center, midpoint rule.
double direct_crt_circle(const Plane2D &f2d, Vec2 center, double radius, std::size_t n_phi);

// Arc integral over the half circle (a, b) = (ell sin t, center_b + ell cos t),
// t in [0, pi]. Axis a is the radius axis of the intermediate function,
// axis b is z.
double direct_crt_halfcircle(const Plane2D &f2d, double center_b, double radius, std::size_t n_theta);

} // namespace srt::oracle
