#pragma once

#include <functional>
#include <span>
#include <vector>

#include "srt/geometry.hpp"
#include "srt/srt_operator.hpp"

namespace srt::bench {

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
};

// Least-squares line through (log x, log y).
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

// Rescales a base scan to m_s voxels per side over the same field of view.
// Columns, heights and radii all grow in proportion to m_s (N ~ M^{1/3}):
// the radius step tracks the voxel size and the radii cover the whole grid
// as seen from the cylinder.
ScanConfig scaled_config(const ScanConfig &base, std::size_t m_s);

struct BenchPoint {
  std::size_t m_s = 0;
  std::size_t m_z = 0;
  std::size_t voxels = 0;
  std::size_t n_columns = 0;
  std::size_t n_heights = 0;
  std::size_t n_radii = 0;
  std::size_t nnz_a12 = 0; // summed over columns
  std::size_t nnz_a34 = 0;
  std::size_t bytes = 0;
  double build_seconds = 0.0;
  double aperture_seconds = 0.0; // forward over all columns
  double column_seconds = 0.0;   // forward_column, single column
};

// Minimum over repeated batches, each batch running at least min_seconds.
double time_call(const std::function<void()> &fn, double min_seconds, int batches = 3);

BenchPoint measure(const ScanConfig &config, double min_seconds);

struct BenchSummary {
  std::vector<BenchPoint> points;
  PowerLawFit aperture_time;
  PowerLawFit column_time;
  PowerLawFit nnz;
};

BenchSummary run(const ScanConfig &base, std::span<const std::size_t> sizes, double min_seconds);

} // namespace srt::bench
