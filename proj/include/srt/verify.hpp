#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srt/geometry.hpp"
#include "srt/solver.hpp"
#include "srt/srt_operator.hpp"

namespace srt::verify {

// |<Ax, y> - <x, A^T y>| / (|Ax| |y|) for Gaussian random x, y.
double dot_test(const LinearMap &map, std::uint64_t seed);
double dot_test(const ColumnOperator &op, std::uint64_t seed);

// sqrt(sum (a-b)^2 / sum b^2) over the selected entries.
double relative_rmse(std::span<const double> value, std::span<const double> reference);

struct OracleComparison {
  double relative_rmse = 0.0;
  std::size_t compared = 0;
  std::vector<double> factorized;
  std::vector<double> direct;
};

// forward_column vs direct_srt over (h, l) with radii[l] >= min_radius.
OracleComparison compare_with_oracle(const ColumnOperator &op, const Image3D &f, double min_radius,
                                     std::size_t n_theta = 256, std::size_t n_phi = 256);

struct SphereAreaResult {
  double max_relative_error = 0.0;
  std::size_t compared = 0;
};

// f = 1 with a sensor column at the grid center; compares output(h, l)
// with 4 pi ell^2 for every shell that lies inside the grid and has
// ell >= min_radius.
SphereAreaResult sphere_area(const VoxelGrid3D &grid, const SensorColumn &column, std::span<const double> radii,
                             const SamplingParams &sampling, double min_radius);

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool below = true; // pass when measured <= threshold, else when >=
  bool passed = false;
};

CheckResult make_check(std::string name, double measured, double threshold, bool below = true);

// Dot test, oracle comparison, sphere area and gradient checks for a scan.
std::vector<CheckResult> run_all(const ScanConfig &config, std::uint64_t seed);

} // namespace srt::verify
