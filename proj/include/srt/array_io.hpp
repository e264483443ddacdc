#pragma once

#include <string>

#include "srt/codec.hpp"
#include "srt/geometry.hpp"

namespace srt {

// Images are stored with dims (m_s, m_s, m_z); sinograms with dims
// (N_l, N_h, N_c). Dims are listed fastest-varying first.
codec::Array to_array(const Image3D &image);
codec::Array to_array(const Sinogram &sinogram);

// Throw DimensionError naming the first dimension that disagrees.
Image3D image_from_array(const codec::Array &array, const VoxelGrid3D &grid);
Sinogram sinogram_from_array(const codec::Array &array, SinogramShape shape);

void write_image(const Image3D &image, const std::string &path);
Image3D read_image(const std::string &path, const VoxelGrid3D &grid);
void write_sinogram(const Sinogram &sinogram, const std::string &path);
Sinogram read_sinogram(const std::string &path, SinogramShape shape);

} // namespace srt
