#include "srt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "srt/errors.hpp"

namespace srt {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void check_finite(double v, const char *what, int iteration) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string("non-finite ") + what + " at iteration " + std::to_string(iteration), iteration);
  }
}

double objective(const LinearMap &map, std::span<const double> f, std::span<const double> y,
                 std::vector<double> &scratch) {
  map.apply(f, scratch);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = scratch[i] - y[i];
    s += r * r;
  }
  return 0.5 * s;
}

} // namespace

LinearMap as_linear_map(const ApertureOperator &op) {
  LinearMap map;
  map.n_in = op.grid().voxel_count();
  map.n_out = op.sinogram_shape().size();
  map.apply = [&op](std::span<const double> x, std::span<double> y) { op.forward(x, y); };
  map.apply_adjoint = [&op](std::span<const double> y, std::span<double> x) { op.adjoint(y, x); };
  return map;
}

LinearMap with_scaled_adjoint(LinearMap map, double factor) {
  auto inner = map.apply_adjoint;
  map.apply_adjoint = [inner, factor](std::span<const double> y, std::span<double> x) {
    inner(y, x);
    for (double &v : x) v *= factor;
  };
  return map;
}

CglsReport cgls(const LinearMap &map, const VoxelGrid3D &grid, std::span<const double> y, int max_iter, double tol) {
  if (max_iter < 1) throw ValidationError("max_iter must be at least 1");
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
  if (y.size() != map.n_out) throw DimensionError("data length does not match operator");
  if (grid.voxel_count() != map.n_in) throw DimensionError("grid does not match operator");

  std::vector<double> x(map.n_in, 0.0);
  CglsReport report{0, {}, Image3D::zeros(grid)};
  const double y_norm = norm(y);
  check_finite(y_norm, "data norm", 0);
  if (y_norm == 0.0) {
    report.residual_history.push_back(0.0);
    return report;
  }

  std::vector<double> r(y.begin(), y.end());
  std::vector<double> s(map.n_in);
  std::vector<double> q(map.n_out);
  map.apply_adjoint(r, s);
  std::vector<double> p = s;
  double gamma = dot(s, s);
  report.residual_history.push_back(1.0);

  for (int it = 1; it <= max_iter; ++it) {
    if (report.residual_history.back() <= tol || gamma == 0.0) break;
    map.apply(p, q);
    const double delta = dot(q, q);
    check_finite(delta, "search direction norm", it);
    if (delta == 0.0) break;
    const double alpha = gamma / delta;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= alpha * q[i];
    map.apply_adjoint(r, s);
    const double gamma_next = dot(s, s);
    check_finite(gamma_next, "normal-equation residual", it);
    const double beta = gamma_next / gamma;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = s[i] + beta * p[i];
    gamma = gamma_next;
    const double rel = norm(r) / y_norm;
    check_finite(rel, "residual", it);
    report.residual_history.push_back(rel);
    report.iterations = it;
  }
  report.final_image = Image3D(grid, std::move(x));
  return report;
}

CglsReport cgls(const ApertureOperator &op, const Sinogram &y, int max_iter, double tol) {
  if (!(y.shape() == op.sinogram_shape())) throw DimensionError("sinogram shape does not match geometry");
  return cgls(as_linear_map(op), op.grid(), y.values(), max_iter, tol);
}

GradientCheckResult gradient_check(const LinearMap &map, std::span<const double> f0, std::span<const double> y,
                                   int n_directions, std::uint64_t seed) {
  if (n_directions < 1) throw ValidationError("n_directions must be at least 1");
  if (f0.size() != map.n_in) throw DimensionError("image length does not match operator");
  if (y.size() != map.n_out) throw DimensionError("data length does not match operator");

  GradientCheckResult result;
  std::vector<double> residual(map.n_out);
  map.apply(f0, residual);
  for (std::size_t i = 0; i < y.size(); ++i) residual[i] -= y[i];
  std::vector<double> grad(map.n_in);
  map.apply_adjoint(residual, grad);
  result.gradient_norm = norm(grad);
  if (result.gradient_norm < 1e-10) {
    result.skipped = true;
    return result;
  }

  double f_inf = 0.0;
  for (double v : f0) f_inf = std::max(f_inf, std::abs(v));
  const double h = 1e-5 * std::max(f_inf, 1.0);
  result.step = h;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> d(map.n_in), plus(map.n_in), minus(map.n_in), scratch(map.n_out);
  for (int n = 0; n < n_directions; ++n) {
    for (double &v : d) v = normal(rng);
    const double dn = norm(d);
    for (double &v : d) v /= dn;
    for (std::size_t i = 0; i < d.size(); ++i) {
      plus[i] = f0[i] + h * d[i];
      minus[i] = f0[i] - h * d[i];
    }
    const double fd = (objective(map, plus, y, scratch) - objective(map, minus, y, scratch)) / (2.0 * h);
    const double analytic = dot(grad, d);
    const double scale = std::max(std::abs(fd), std::abs(analytic));
    const double disc = scale > 0.0 ? std::abs(fd - analytic) / scale : 0.0;
    result.max_discrepancy = std::max(result.max_discrepancy, disc);
  }
  return result;
}

GradientCheckResult gradient_check(const ApertureOperator &op, const Image3D &f0, const Sinogram &y,
                                   int n_directions, std::uint64_t seed) {
  if (!(f0.grid() == op.grid())) throw DimensionError("image grid does not match operator grid");
  if (!(y.shape() == op.sinogram_shape())) throw DimensionError("sinogram shape does not match geometry");
  return gradient_check(as_linear_map(op), f0.values(), y.values(), n_directions, seed);
}

} // namespace srt
