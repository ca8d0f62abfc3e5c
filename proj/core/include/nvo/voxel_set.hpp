// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/geometry.hpp"
#include "nvo/morton.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nvo {

/// Cubic N^3 lattice over an axis-aligned cube.
struct VoxelGrid {
    std::uint32_t resolution = 1;
    Aabb bounds{Vec3::Zero(), Vec3::Ones()};

    /// Throws ContractError unless the resolution is a power of two below
    /// 2^21 and the bounds are a non-degenerate cube.
    void validate() const;

    double cell_size() const { return (bounds.hi.x() - bounds.lo.x()) / resolution; }
    /// Number of Morton bits per axis actually used (log2 resolution).
    int level_count() const;

    Vec3 cell_center(const GridCoord& c) const;
    Aabb cell_box(const GridCoord& c) const;
    /// The cell containing `p` (half-open cells, the far faces of the cube
    /// belong to the last cell), or nullopt outside the bounds.
    std::optional<GridCoord> cell_of(const Vec3& p) const;
    bool contains(const GridCoord& c) const {
        return c.i < resolution && c.j < resolution && c.k < resolution;
    }
};

/// Occupied cells of a grid. Cell i is FLUT entry i.
struct VoxelSet {
    VoxelGrid grid;
    std::vector<GridCoord> cells;

    std::size_t size() const { return cells.size(); }
    Vec3 center(std::size_t index) const { return grid.cell_center(cells[index]); }

    /// Throws ContractError on an empty set, out-of-range or duplicate cells.
    void validate() const;
};

}  // namespace nvo
