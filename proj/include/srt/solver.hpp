#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "srt/geometry.hpp"
#include "srt/srt_operator.hpp"

namespace srt {

// A linear map given by its action and the action of its (claimed) adjoint.
struct LinearMap {
  std::size_t n_in = 0;  // image length
  std::size_t n_out = 0; // data length
  std::function<void(std::span<const double>, std::span<double>)> apply;
  std::function<void(std::span<const double>, std::span<double>)> apply_adjoint;
};

LinearMap as_linear_map(const ApertureOperator &op);

// Same forward map, adjoint output multiplied by `factor`. Used to show that
// gradient_check catches an unmatched adjoint.
LinearMap with_scaled_adjoint(LinearMap map, double factor);

struct CglsReport {
  int iterations = 0;
  std::vector<double> residual_history; // |Ax - y| / |y|, entry 0 is the start
  Image3D final_image;
};

// Conjugate gradients on the normal equations, started from zero. Stops when
// the relative residual reaches tol or after max_iter iterations.
CglsReport cgls(const ApertureOperator &op, const Sinogram &y, int max_iter, double tol);
CglsReport cgls(const LinearMap &map, const VoxelGrid3D &grid, std::span<const double> y, int max_iter, double tol);

struct GradientCheckResult {
  double max_discrepancy = 0.0;
  double gradient_norm = 0.0;
  double step = 0.0;
  bool skipped = false; // gradient below 1e-10, nothing to compare
};

// Compares the adjoint gradient A^T(A f0 - y) of J(f) = |A f - y|^2 / 2
// against central differences along n_directions random unit directions.
// The discrepancy per direction is |fd - g.d| / max(|fd|, |g.d|).
GradientCheckResult gradient_check(const LinearMap &map, std::span<const double> f0, std::span<const double> y,
                                   int n_directions, std::uint64_t seed);
GradientCheckResult gradient_check(const ApertureOperator &op, const Image3D &f0, const Sinogram &y,
                                   int n_directions, std::uint64_t seed);

} // namespace srt
