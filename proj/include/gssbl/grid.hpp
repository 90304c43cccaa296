// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <array>

#include "gssbl/errors.hpp"

namespace gssbl {

// Axis-aligned voxelization of the 3D region of interest. Every voxel center
// is one candidate virtual-source location. Immutable after construction and
// safe to share across threads.
struct VoxelGrid {
  Eigen::Vector3d origin{0.0, 0.0, 0.0};        // lower corner [m]
  Eigen::Vector3d cell_size{25.0, 25.0, 10.0};  // per-axis cell extent [m]
  std::array<int, 3> counts{1, 1, 1};           // voxels per axis (Nx, Ny, Nz)

  int num_voxels() const noexcept { return counts[0] * counts[1] * counts[2]; }

  // Throws UsageError unless all counts are >= 1, all cell dimensions are
  // strictly positive, the origin is finite, and the total voxel count fits
  // in an int.
  void validate() const;
};

// Center of voxel `index` under row-major (x fastest) linearization:
// origin + (integer coords + 0.5) .* cell_size. Bounds-checked.
Eigen::Vector3d voxel_center(const VoxelGrid& grid, int index);

// Linear index of integer coordinates (ix, iy, iz); inverse of coords_of.
// Bounds-checked per axis.
int index_of(const VoxelGrid& grid, int ix, int iy, int iz);

// Integer coordinates (ix, iy, iz) of a linear index. Bounds-checked.
std::array<int, 3> coords_of(const VoxelGrid& grid, int index);

}  // namespace gssbl
