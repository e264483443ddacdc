#include "srt/array_io.hpp"

#include <array>

#include "srt/errors.hpp"

namespace srt {

namespace {

template <std::size_t N>
void check_dims(const codec::Array &a, const std::array<std::uint64_t, N> &expected,
                const std::array<const char *, N> &names, const char *what) {
  if (a.dims.size() != N) {
    throw DimensionError(std::string(what) + " file has rank " + std::to_string(a.dims.size()) + ", expected " +
                         std::to_string(N));
  }
  for (std::size_t n = 0; n < N; ++n) {
    if (a.dims[n] != expected[n]) {
      throw DimensionError(std::string(what) + " dimension " + names[n] + " mismatch: file has " +
                           std::to_string(a.dims[n]) + ", expected " + std::to_string(expected[n]));
    }
  }
}

} // namespace

codec::Array to_array(const Image3D &image) {
  const auto &g = image.grid();
  return codec::Array{{g.m_s(), g.m_s(), g.m_z()}, image.values()};
}

codec::Array to_array(const Sinogram &sinogram) {
  const auto &s = sinogram.shape();
  return codec::Array{{s.n_radii, s.n_heights, s.n_columns}, sinogram.values()};
}

Image3D image_from_array(const codec::Array &array, const VoxelGrid3D &grid) {
  check_dims<3>(array, {grid.m_s(), grid.m_s(), grid.m_z()}, {"m_s (x)", "m_s (y)", "m_z"}, "image");
  return Image3D(grid, array.data);
}

Sinogram sinogram_from_array(const codec::Array &array, SinogramShape shape) {
  check_dims<3>(array, {shape.n_radii, shape.n_heights, shape.n_columns}, {"n_radii", "n_heights", "n_columns"},
                "sinogram");
  return Sinogram(shape, array.data);
}

void write_image(const Image3D &image, const std::string &path) { codec::write_array_file(to_array(image), path); }

Image3D read_image(const std::string &path, const VoxelGrid3D &grid) {
  return image_from_array(codec::read_array_file(path), grid);
}

void write_sinogram(const Sinogram &sinogram, const std::string &path) {
  codec::write_array_file(to_array(sinogram), path);
}

Sinogram read_sinogram(const std::string &path, SinogramShape shape) {
  return sinogram_from_array(codec::read_array_file(path), shape);
}

} // namespace srt
