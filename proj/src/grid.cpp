// SPDX-License-Identifier: Apache-2.0
#include "gssbl/grid.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gssbl {

void VoxelGrid::validate() const {
  for (int axis = 0; axis < 3; ++axis) {
    if (counts[axis] < 1) {
      throw UsageError("grid counts must be >= 1 per axis");
    }
    if (!std::isfinite(cell_size[axis]) || !(cell_size[axis] > 0.0)) {
      throw UsageError("grid cell_size must be strictly positive and finite");
    }
    if (!std::isfinite(origin[axis])) {
      throw UsageError("grid origin must be finite");
    }
  }
  const long long total = 1LL * counts[0] * counts[1] * counts[2];
  if (total > std::numeric_limits<int>::max()) {
    throw UsageError("grid voxel count exceeds the supported range");
  }
}

Eigen::Vector3d voxel_center(const VoxelGrid& grid, int index) {
  const std::array<int, 3> c = coords_of(grid, index);
  Eigen::Vector3d center;
  for (int axis = 0; axis < 3; ++axis) {
    center[axis] = grid.origin[axis] + (c[axis] + 0.5) * grid.cell_size[axis];
  }
  return center;
}

int index_of(const VoxelGrid& grid, int ix, int iy, int iz) {
  const int coords[3] = {ix, iy, iz};
  for (int axis = 0; axis < 3; ++axis) {
    if (coords[axis] < 0 || coords[axis] >= grid.counts[axis]) {
      throw NumericError("voxel coordinate out of range on axis " + std::to_string(axis));
    }
  }
  return ix + grid.counts[0] * (iy + grid.counts[1] * iz);
}

std::array<int, 3> coords_of(const VoxelGrid& grid, int index) {
  if (index < 0 || index >= grid.num_voxels()) {
    throw NumericError("voxel index out of range: " + std::to_string(index));
  }
  const int nx = grid.counts[0];
  const int ny = grid.counts[1];
  return {index % nx, (index / nx) % ny, index / (nx * ny)};
}

}  // namespace gssbl
