#include "srt/srt_operator.hpp"

#include <algorithm>
#include <string>

#include "srt/crt.hpp"
#include "srt/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace srt {

namespace {

void check_grid(const VoxelGrid3D &expected, const VoxelGrid3D &got) {
  if (got.m_s() != expected.m_s()) {
    throw DimensionError("image dimension m_s=" + std::to_string(got.m_s()) + " does not match operator m_s=" +
                         std::to_string(expected.m_s()));
  }
  if (got.m_z() != expected.m_z()) {
    throw DimensionError("image dimension m_z=" + std::to_string(got.m_z()) + " does not match operator m_z=" +
                         std::to_string(expected.m_z()));
  }
  if (!(got == expected)) throw DimensionError("image grid spacing/origin does not match operator grid");
}

void check_length(std::size_t got, std::size_t expected, const char *what) {
  if (got != expected) {
    throw DimensionError(std::string(what) + " has " + std::to_string(got) + " entries, expected " +
                         std::to_string(expected));
  }
}

int worker_count() {
#ifdef _OPENMP
  return omp_in_parallel() ? 1 : omp_get_max_threads();
#else
  return 1;
#endif
}

} // namespace

ColumnOperator::ColumnOperator(std::shared_ptr<const SparseOperator> a12, std::shared_ptr<const SparseOperator> a34,
                               VoxelGrid3D grid, SensorColumn column, std::vector<double> radii)
    : a12_(std::move(a12)), a34_(std::move(a34)), grid_(grid), column_(std::move(column)), radii_(std::move(radii)) {
  if (!a12_ || !a34_) throw ValidationError("column operator needs both matrices");
  const std::size_t n_l = a12_->n_rows();
  if (radii_.size() != n_l) throw DimensionError("a12 rows must equal the number of radii");
  const std::size_t n_h = column_.heights.size();
  if (a12_->n_cols() != grid_.plane_size()) throw DimensionError("a12 columns must equal m_s^2");
  if (a34_->n_cols() != n_l * grid_.m_z()) throw DimensionError("a34 columns must equal N_l*m_z");
  if (a34_->n_rows() != n_l * n_h) throw DimensionError("a34 rows must equal N_l*N_h");
}

ColumnOperator ColumnOperator::build(const VoxelGrid3D &grid, const SensorColumn &column,
                                     std::span<const double> radii, const SamplingParams &sampling) {
  auto a12 = std::make_shared<const SparseOperator>(build_xy_crt(grid, column.center_xy, radii, sampling));
  auto a34 = std::make_shared<const SparseOperator>(
      build_zl_crt(grid.m_z(), grid.spacing(), grid.origin().z, radii, column.heights, sampling));
  return ColumnOperator(std::move(a12), std::move(a34), grid, column, {radii.begin(), radii.end()});
}

void ColumnOperator::materialize_transposes(std::shared_ptr<const SparseOperator> a34_transpose) {
  if (t12_) return;
  if (a34_transpose && (a34_transpose->n_rows() != a34_->n_cols() || a34_transpose->n_cols() != a34_->n_rows())) {
    throw DimensionError("a34 transpose has the wrong shape");
  }
  t12_ = std::make_shared<const SparseOperator>(transpose(*a12_));
  t34_ = a34_transpose ? std::move(a34_transpose) : std::make_shared<const SparseOperator>(transpose(*a34_));
}

void ColumnOperator::forward(std::span<const double> image, std::span<double> block) const {
  check_length(image.size(), grid_.voxel_count(), "image");
  check_length(block.size(), block_size(), "column block");
  const std::size_t plane = grid_.plane_size();
  const std::size_t n_l = n_radii();
  const auto m_z = static_cast<std::ptrdiff_t>(grid_.m_z());

  // First plane: Y (N_l x M_z) = A12 * F (M_s^2 x M_z), one z-layer at a time.
  std::vector<double> intermediate(n_l * grid_.m_z());
#pragma omp parallel for if (worker_count() > 1)
  for (std::ptrdiff_t k = 0; k < m_z; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    a12_->apply(image.subspan(uk * plane, plane), std::span(intermediate).subspan(uk * n_l, n_l));
  }
  // Second plane on vec(Y).
  a34_->apply(intermediate, block);
}

void ColumnOperator::adjoint(std::span<const double> block, std::span<double> image) const {
  check_length(block.size(), block_size(), "column block");
  check_length(image.size(), grid_.voxel_count(), "image");
  const std::size_t plane = grid_.plane_size();
  const std::size_t n_l = n_radii();
  const auto m_z = static_cast<std::ptrdiff_t>(grid_.m_z());

  std::vector<double> intermediate(n_l * grid_.m_z());
  if (t34_) {
    t34_->apply(block, intermediate);
  } else {
    a34_->apply_transpose(block, intermediate);
  }
#pragma omp parallel for if (worker_count() > 1)
  for (std::ptrdiff_t k = 0; k < m_z; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const auto in = std::span<const double>(intermediate).subspan(uk * n_l, n_l);
    const auto out = image.subspan(uk * plane, plane);
    if (t12_) {
      t12_->apply(in, out);
    } else {
      a12_->apply_transpose(in, out);
    }
  }
}

std::vector<double> forward_column(const ColumnOperator &op, const Image3D &f) {
  check_grid(op.grid(), f.grid());
  std::vector<double> block(op.block_size());
  op.forward(f.values(), block);
  return block;
}

Image3D adjoint_column(const ColumnOperator &op, std::span<const double> block) {
  check_length(block.size(), op.block_size(), "column block");
  std::vector<double> image(op.grid().voxel_count());
  op.adjoint(block, image);
  return Image3D(op.grid(), std::move(image));
}

ApertureOperator::ApertureOperator(std::vector<std::shared_ptr<const SparseOperator>> a12,
                                   std::shared_ptr<const SparseOperator> a34, VoxelGrid3D grid,
                                   ApertureGeometry geometry)
    : grid_(grid), geometry_(std::move(geometry)), a34_(std::move(a34)) {
  if (a12.size() != geometry_.n_columns()) {
    throw DimensionError("aperture needs one x-y matrix per column: got " + std::to_string(a12.size()) +
                         ", expected " + std::to_string(geometry_.n_columns()));
  }
  for (std::size_t c = 0; c < a12.size(); ++c) {
    if (!a12[c] || a12[c]->n_rows() != geometry_.n_radii()) {
      throw DimensionError("x-y matrix for column " + std::to_string(c) + " must have N_l rows");
    }
    columns_.emplace_back(std::move(a12[c]), a34_, grid_, geometry_.column(c), geometry_.radii());
  }
}

ApertureOperator ApertureOperator::build(const VoxelGrid3D &grid, const ApertureGeometry &geometry,
                                         const SamplingParams &sampling) {
  const auto &radii = geometry.radii();
  auto a34 = std::make_shared<const SparseOperator>(
      build_zl_crt(grid.m_z(), grid.spacing(), grid.origin().z, radii, geometry.heights(), sampling));
  std::vector<std::shared_ptr<const SparseOperator>> a12;
  a12.reserve(geometry.n_columns());
  for (const auto &column : geometry.columns()) {
    a12.push_back(std::make_shared<const SparseOperator>(build_xy_crt(grid, column.center_xy, radii, sampling)));
  }
  return ApertureOperator(std::move(a12), std::move(a34), grid, geometry);
}

std::size_t ApertureOperator::total_nnz() const noexcept {
  std::size_t n = a34_->nnz();
  for (const auto &c : columns_) n += c.a12().nnz();
  return n;
}

void ApertureOperator::materialize_transposes() {
  if (columns_.front().has_transposes()) return;
  auto t34 = std::make_shared<const SparseOperator>(transpose(*a34_));
  for (auto &c : columns_) c.materialize_transposes(t34);
}

void ApertureOperator::forward(std::span<const double> image, std::span<double> sinogram) const {
  const std::size_t block = geometry_.measurements_per_column();
  check_length(image.size(), grid_.voxel_count(), "image");
  check_length(sinogram.size(), block * columns_.size(), "sinogram");
  const auto n_c = static_cast<std::ptrdiff_t>(columns_.size());
  // Output blocks are disjoint, so columns run independently.
#pragma omp parallel for schedule(dynamic, 1) if (worker_count() > 1)
  for (std::ptrdiff_t c = 0; c < n_c; ++c) {
    const auto uc = static_cast<std::size_t>(c);
    columns_[uc].forward(image, sinogram.subspan(uc * block, block));
  }
}

void ApertureOperator::adjoint(std::span<const double> sinogram, std::span<double> image) const {
  const std::size_t block = geometry_.measurements_per_column();
  const std::size_t m = grid_.voxel_count();
  check_length(sinogram.size(), block * columns_.size(), "sinogram");
  check_length(image.size(), m, "image");
  std::fill(image.begin(), image.end(), 0.0);

  // Partial images are computed a chunk of columns at a time and then added
  // into the result in column order, so the sum is the same for any thread
  // count.
  const std::size_t chunk = std::max<std::size_t>(1, std::min<std::size_t>(worker_count(), columns_.size()));
  std::vector<double> partial(chunk * m);
  for (std::size_t first = 0; first < columns_.size(); first += chunk) {
    const std::size_t count = std::min(chunk, columns_.size() - first);
#pragma omp parallel for schedule(dynamic, 1) if (count > 1)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(count); ++n) {
      const auto un = static_cast<std::size_t>(n);
      columns_[first + un].adjoint(sinogram.subspan((first + un) * block, block),
                                   std::span(partial).subspan(un * m, m));
    }
    for (std::size_t n = 0; n < count; ++n) {
      const double *p = partial.data() + n * m;
      for (std::size_t i = 0; i < m; ++i) image[i] += p[i];
    }
  }
}

Sinogram forward_aperture(const ApertureOperator &op, const Image3D &f) {
  check_grid(op.grid(), f.grid());
  std::vector<double> out(op.sinogram_shape().size());
  op.forward(f.values(), out);
  return Sinogram(op.sinogram_shape(), std::move(out));
}

Image3D adjoint_aperture(const ApertureOperator &op, const Sinogram &y) {
  if (!(y.shape() == op.sinogram_shape())) {
    const auto &s = y.shape();
    const auto e = op.sinogram_shape();
    throw DimensionError("sinogram shape (" + std::to_string(s.n_columns) + "," + std::to_string(s.n_heights) + "," +
                         std::to_string(s.n_radii) + ") does not match geometry (" + std::to_string(e.n_columns) +
                         "," + std::to_string(e.n_heights) + "," + std::to_string(e.n_radii) + ")");
  }
  std::vector<double> image(op.grid().voxel_count());
  op.adjoint(y.values(), image);
  return Image3D(op.grid(), std::move(image));
}

} // namespace srt
