#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "srt/crt.hpp"
#include "srt/errors.hpp"
#include "srt/oracle.hpp"

using namespace srt;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> uniform_radii(std::size_t n, double step) {
  std::vector<double> r(n);
  for (std::size_t l = 0; l < n; ++l) r[l] = step * static_cast<double>(l);
  return r;
}

std::vector<std::size_t> row_counts(const SparseOperator &a) {
  std::vector<std::size_t> counts(a.n_rows());
  for (std::size_t r : a.row_indices()) ++counts[r];
  return counts;
}

double row_dot(const SparseOperator &a, std::size_t row, const std::vector<double> &x) {
  std::vector<double> y(a.n_rows());
  a.apply(x, y);
  return y[row];
}

// Exact Gaussian used by the x-y row check: 32x32 grid, unit spacing,
// voxel centers at integer coordinates.
double plane_gaussian(double x, double y) {
  const double dx = x - 14.3, dy = y - 17.1;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * 6.0 * 6.0));
}

// Smooth separable function on the (ell', z) plane.
double halfplane_function(double a, double b) { return std::exp(-(a / 4.0) * (a / 4.0)) * (1.0 + 0.2 * std::cos(0.3 * b)); }

} // namespace

TEST_CASE("x-y rows integrate a constant to 2*pi*ell") {
  const VoxelGrid3D g = VoxelGrid3D::centered(32, 1, 1.0);
  const auto radii = uniform_radii(15, 1.0); // all circles inside the 32x32 plane
  const auto a = build_xy_crt(g, Vec2{0.0, 0.0}, radii, {});
  const auto sums = a.row_sums();
  CHECK(sums[0] == 0.0);
  for (std::size_t l = 1; l < radii.size(); ++l) CHECK(std::abs(sums[l] - 2.0 * kPi * radii[l]) <= 1e-12);

  const auto counts = row_counts(a);
  CHECK(counts[0] == 0);
  for (std::size_t l = 0; l < radii.size(); ++l) CHECK(counts[l] <= full_circle_nodes(radii[l], 1.0, {}));
}

TEST_CASE("z-ell rows integrate a constant to pi*ell") {
  // ell' in [-0.25, 3.75), z in [-0.5, 15.5): every half circle fits.
  const auto radii = uniform_radii(8, 0.5);
  const std::vector<double> heights{5.0, 7.0, 9.0, 11.0};
  const auto a = build_zl_crt(16, 1.0, 0.0, radii, heights, {});
  CHECK(a.n_rows() == 32);
  CHECK(a.n_cols() == 8 * 16);
  const auto sums = a.row_sums();
  const auto counts = row_counts(a);
  for (std::size_t h = 0; h < heights.size(); ++h) {
    for (std::size_t l = 0; l < radii.size(); ++l) {
      const std::size_t r = l + 8 * h;
      CHECK(std::abs(sums[r] - kPi * radii[l]) <= 1e-12);
      CHECK(counts[r] <= half_circle_nodes(radii[l], 0.5, {}));
    }
  }
}

TEST_CASE("circles leaving the grid lose weight") {
  const VoxelGrid3D g = VoxelGrid3D::centered(8, 1, 1.0);
  const std::vector<double> radii{10.0};
  const auto a = build_xy_crt(g, Vec2{0.0, 0.0}, radii, {});
  CHECK(a.nnz() == 0);
  const auto b = build_xy_crt(g, Vec2{4.0, 0.0}, std::vector<double>{2.0}, {});
  CHECK(b.row_sums()[0] < 2.0 * kPi * 2.0);
  CHECK(b.row_sums()[0] > 0.0);
}

TEST_CASE("x-y row against a dense trapezoid of the exact Gaussian") {
  const VoxelGrid3D g(32, 1, 1.0, {0.0, 0.0, 0.0});
  std::vector<double> f(g.plane_size());
  for (std::size_t j = 0; j < 32; ++j) {
    for (std::size_t i = 0; i < 32; ++i) f[g.flatten(i, j, 0)] = plane_gaussian(double(i), double(j));
  }
  const std::vector<double> radii{5.0};
  const auto a = build_xy_crt(g, Vec2{16.0, 16.0}, radii, {});

  constexpr std::size_t n = 100000;
  double trap = 0.0;
  for (std::size_t q = 0; q <= n; ++q) {
    const double phi = 2.0 * kPi * double(q) / double(n);
    const double w = (q == 0 || q == n) ? 0.5 : 1.0;
    trap += w * plane_gaussian(16.0 + 5.0 * std::cos(phi), 16.0 + 5.0 * std::sin(phi)) * 5.0;
  }
  trap *= 2.0 * kPi / double(n);
  CHECK(trap == doctest::Approx(21.387867076909398).epsilon(1e-10));

  const double row = row_dot(a, 0, f);
  CHECK(std::abs(row - trap) / trap <= 0.01);
}

TEST_CASE("z-ell rows against a dense midpoint rule of a smooth function") {
  const auto radii = uniform_radii(8, 0.5);
  const std::vector<double> heights{5.0, 7.0, 9.0, 11.0};
  const auto a = build_zl_crt(16, 1.0, 0.0, radii, heights, {});
  std::vector<double> f(8 * 16);
  for (std::size_t z = 0; z < 16; ++z) {
    for (std::size_t l = 0; l < 8; ++l) f[l + 8 * z] = halfplane_function(radii[l], double(z));
  }
  std::vector<double> y(a.n_rows());
  a.apply(f, y);

  // 100000-node midpoint values of the continuous half-circle integrals.
  const double frozen[32] = {
      0, 1.5805218784456418, 3.0877889292735587, 4.4568595580606525, 5.6379664543366976, 6.6008125194579499,
      7.3357685534723638, 7.8520968612613693, 0, 1.4021132582525693, 2.7451472292846026, 3.976785121915686,
      5.057038923532831, 5.9617043714614146, 6.6832697517633228, 7.2293874998127272, 0, 1.2783685879239237,
      2.5074900793100383, 3.6438042784470248, 4.6541061184566868, 5.518417343107088, 6.2306949321164797,
      6.7974747112959335, 0, 1.2525154409620194, 2.4578379592751163, 3.5742368161972879, 4.5699240603709566,
      5.4258043468470207, 6.1361414996937951, 6.7072380589488496};

  constexpr std::size_t n = 100000;
  for (std::size_t h = 0; h < heights.size(); ++h) {
    for (std::size_t l = 0; l < radii.size(); ++l) {
      const std::size_t r = l + 8 * h;
      const double ell = radii[l];
      double mid = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        const double t = (double(q) + 0.5) * kPi / double(n);
        mid += halfplane_function(ell * std::sin(t), heights[h] + ell * std::cos(t));
      }
      mid *= ell * kPi / double(n);
      CHECK(mid == doctest::Approx(frozen[r]).epsilon(1e-10));
      if (ell == 0.0) {
        CHECK(y[r] == 0.0);
      } else {
        CHECK(std::abs(y[r] - mid) / mid <= 0.02);
      }
    }
  }
}

TEST_CASE("doubling eta moves row values by less than the coarse error bound") {
  const VoxelGrid3D g(32, 1, 1.0, {0.0, 0.0, 0.0});
  std::vector<double> f(g.plane_size());
  for (std::size_t j = 0; j < 32; ++j) {
    for (std::size_t i = 0; i < 32; ++i) f[g.flatten(i, j, 0)] = plane_gaussian(double(i), double(j));
  }
  const Image3D image(g, f);
  const auto plane = oracle::layer(image, 0);
  const Vec2 center{16.0, 16.0};
  const std::vector<double> radii{3.0, 5.0, 7.0, 9.0, 11.0, 13.0};

  // Midpoint rule on a periodic integrand of bounded variation:
  // |error| <= (dphi / 2) * TV(g) with g(phi) = ell * f(center + ell * u(phi)).
  std::vector<double> variation;
  constexpr std::size_t dense = 1 << 18;
  for (double ell : radii) {
    double tv = 0.0;
    double prev = plane.sample(center.x + ell, center.y);
    for (std::size_t q = 1; q <= dense; ++q) {
      const double phi = 2.0 * kPi * double(q) / double(dense);
      const double v = plane.sample(center.x + ell * std::cos(phi), center.y + ell * std::sin(phi));
      tv += std::abs(v - prev);
      prev = v;
    }
    variation.push_back(ell * tv);
  }

  auto values = [&](double eta) {
    SamplingParams s;
    s.points_per_voxel_arc = eta;
    const auto a = build_xy_crt(g, center, radii, s);
    std::vector<double> y(radii.size());
    a.apply(f, y);
    return y;
  };
  for (double eta : {1.0, 2.0, 4.0, 8.0}) {
    const auto coarse = values(eta);
    const auto fine = values(2.0 * eta);
    SamplingParams s;
    s.points_per_voxel_arc = eta;
    for (std::size_t l = 0; l < radii.size(); ++l) {
      const double dphi = 2.0 * kPi / double(full_circle_nodes(radii[l], 1.0, s));
      const double bound = 0.5 * dphi * variation[l];
      CAPTURE(eta);
      CAPTURE(radii[l]);
      CHECK(variation[l] > 0.0);
      CHECK(std::abs(fine[l] - coarse[l]) < bound);
    }
  }
}

TEST_CASE("radius lists are validated") {
  const VoxelGrid3D g = VoxelGrid3D::centered(8, 4, 1.0);
  const std::vector<double> heights{0.0};
  CHECK_THROWS_AS(build_zl_crt(4, 1.0, 0.0, std::vector<double>{0.0, 1.0, 3.0}, heights, {}), ValidationError);
  CHECK_THROWS_AS(build_zl_crt(4, 1.0, 0.0, std::vector<double>{}, heights, {}), ValidationError);
  CHECK_THROWS_AS(build_xy_crt(g, Vec2{}, std::vector<double>{}, {}), ValidationError);
  CHECK_THROWS_AS(build_xy_crt(g, Vec2{}, std::vector<double>{2.0, 1.0}, {}), ValidationError);
  CHECK_THROWS_AS(build_xy_crt(g, Vec2{}, std::vector<double>{-1.0}, {}), ValidationError);
  CHECK(radius_bin_width(std::vector<double>{2.0}, 0.75) == 0.75);
  CHECK(radius_bin_width(std::vector<double>{1.0, 1.5, 2.0}, 0.75) == doctest::Approx(0.5));
  SamplingParams bad;
  bad.points_per_voxel_arc = 0.0;
  CHECK_THROWS_AS(build_xy_crt(g, Vec2{}, std::vector<double>{1.0}, bad), ValidationError);
}

TEST_CASE("node counts follow the sampling rule") {
  const SamplingParams s;
  CHECK(full_circle_nodes(0.0, 1.0, s) == 8);
  CHECK(full_circle_nodes(5.0, 1.0, s) == static_cast<std::size_t>(std::ceil(2.0 * kPi * 5.0 * 4.0)));
  CHECK(half_circle_nodes(5.0, 0.5, s) == static_cast<std::size_t>(std::ceil(kPi * 5.0 * 4.0 / 0.5)));
}

TEST_CASE("matrix build does not depend on the thread schedule") {
  const VoxelGrid3D g = VoxelGrid3D::centered(24, 4, 1.0);
  const auto radii = uniform_radii(20, 1.0);
  const auto a = build_xy_crt(g, Vec2{14.0, 3.0}, radii, {});
  const auto b = build_xy_crt(g, Vec2{14.0, 3.0}, radii, {});
  CHECK(a == b);
}
