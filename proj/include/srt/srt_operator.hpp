#pragma once

#include <memory>
#include <span>
#include <vector>

#include "srt/geometry.hpp"
#include "srt/sparse.hpp"

namespace srt {

// One sensor column: the x-y CRT about its center and the z-ell CRT over its
// heights. forward() is A34 * vec(A12 * mat(F)); adjoint() is its exact
// transpose. Both reshapes are free under the grid's flattening convention.
class ColumnOperator {
public:
  ColumnOperator(std::shared_ptr<const SparseOperator> a12, std::shared_ptr<const SparseOperator> a34,
                 VoxelGrid3D grid, SensorColumn column, std::vector<double> radii);

  static ColumnOperator build(const VoxelGrid3D &grid, const SensorColumn &column, std::span<const double> radii,
                              const SamplingParams &sampling);

  const SparseOperator &a12() const noexcept { return *a12_; }
  const SparseOperator &a34() const noexcept { return *a34_; }
  const VoxelGrid3D &grid() const noexcept { return grid_; }
  const SensorColumn &column() const noexcept { return column_; }
  const std::vector<double> &radii() const noexcept { return radii_; }
  std::size_t n_radii() const noexcept { return a12_->n_rows(); }
  std::size_t n_heights() const noexcept { return column_.heights.size(); }
  std::size_t block_size() const noexcept { return a34_->n_rows(); }

  // Keeps explicit transposes so the adjoint runs as column scatter instead
  // of row gather. Costs a second copy of both matrices; a precomputed
  // transpose of a34 may be passed in when it is shared.
  void materialize_transposes(std::shared_ptr<const SparseOperator> a34_transpose = nullptr);
  bool has_transposes() const noexcept { return static_cast<bool>(t12_); }

  // Raw kernels on flat arrays; image is (M_s^2 * M_z), block is (N_h * N_l).
  void forward(std::span<const double> image, std::span<double> block) const;
  void adjoint(std::span<const double> block, std::span<double> image) const;

private:
  std::shared_ptr<const SparseOperator> a12_;
  std::shared_ptr<const SparseOperator> a34_;
  std::shared_ptr<const SparseOperator> t12_;
  std::shared_ptr<const SparseOperator> t34_;
  VoxelGrid3D grid_;
  SensorColumn column_;
  std::vector<double> radii_;
};

// Column sinogram block, radius fastest: flat = l + N_l*h.
std::vector<double> forward_column(const ColumnOperator &op, const Image3D &f);
Image3D adjoint_column(const ColumnOperator &op, std::span<const double> block);

// All columns of a cylindrical aperture. Every column owns its x-y matrix;
// the z-ell matrix depends only on heights and radii and is shared.
class ApertureOperator {
public:
  ApertureOperator(std::vector<std::shared_ptr<const SparseOperator>> a12, std::shared_ptr<const SparseOperator> a34,
                   VoxelGrid3D grid, ApertureGeometry geometry);

  static ApertureOperator build(const VoxelGrid3D &grid, const ApertureGeometry &geometry,
                                const SamplingParams &sampling);

  const VoxelGrid3D &grid() const noexcept { return grid_; }
  const ApertureGeometry &geometry() const noexcept { return geometry_; }
  SinogramShape sinogram_shape() const noexcept { return SinogramShape::of(geometry_); }
  std::size_t n_columns() const noexcept { return columns_.size(); }
  const ColumnOperator &column(std::size_t c) const { return columns_.at(c); }
  const SparseOperator &shared_a34() const noexcept { return columns_.front().a34(); }
  const std::shared_ptr<const SparseOperator> &shared_a34_ptr() const noexcept { return a34_; }

  std::size_t total_nnz() const noexcept;

  void materialize_transposes();

  void forward(std::span<const double> image, std::span<double> sinogram) const;
  void adjoint(std::span<const double> sinogram, std::span<double> image) const;

private:
  VoxelGrid3D grid_;
  ApertureGeometry geometry_;
  std::shared_ptr<const SparseOperator> a34_;
  std::vector<ColumnOperator> columns_;
};

Sinogram forward_aperture(const ApertureOperator &op, const Image3D &f);
Image3D adjoint_aperture(const ApertureOperator &op, const Sinogram &y);

} // namespace srt
