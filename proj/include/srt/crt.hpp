#pragma once

#include <span>

#include "srt/geometry.hpp"
#include "srt/sparse.hpp"

namespace srt {

// Full-circle CRT in the x-y plane: an (N_l x M_s^2) matrix whose row l
// integrates an x-y layer over the circle of radius radii[l] about center_xy.
//
// Midpoint rule in angle with N_phi = max(min_points, ceil(2*pi*ell*eta/h))
// nodes; each node adds ell*dphi to the voxel that contains it. Nodes outside
// the grid are dropped and ell == 0 produces an empty row.
SparseOperator build_xy_crt(const VoxelGrid3D &grid, Vec2 center_xy, std::span<const double> radii,
                            const SamplingParams &sampling);

// Half-circle CRT in the (z, ell') plane: an (N_l*N_h x N_l*M_z) matrix.
//
// The intermediate function (x-y CRT values per z-layer) lives on a grid
// whose ell' bins are the measurement radii and whose z bins are the voxel
// layers, laid out radius fastest (flat = l' + N_l*z). Row l + N_l*h
// integrates it over the half circle of radius radii[l] centered at
// (heights[h], 0), theta in [0, pi]. Radii must be uniformly spaced.
SparseOperator build_zl_crt(std::size_t m_z, double z_spacing, double z_origin, std::span<const double> radii,
                            std::span<const double> heights, const SamplingParams &sampling);

// Width of the ell' bins used by build_zl_crt; throws ValidationError when
// the radii are not uniformly spaced. A single radius uses z_spacing.
double radius_bin_width(std::span<const double> radii, double z_spacing);

std::size_t full_circle_nodes(double radius, double spacing, const SamplingParams &sampling);
std::size_t half_circle_nodes(double radius, double bin, const SamplingParams &sampling);

} // namespace srt
