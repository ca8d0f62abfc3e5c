// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/voxel_set.hpp"

#include "nvo/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

namespace nvo {

void VoxelGrid::validate() const {
    if (resolution == 0 || !std::has_single_bit(resolution) || resolution >= kMortonCoordLimit) {
        throw ContractError(fmt::format("grid resolution {} must be a power of two below 2^21", resolution));
    }
    const Vec3 ext = bounds.extent();
    if (!ext.allFinite() || !(ext.minCoeff() > 0.0)) {
        throw ContractError("grid bounds must be a non-degenerate box");
    }
    if (std::abs(ext.x() - ext.y()) > 1e-6 * ext.x() || std::abs(ext.x() - ext.z()) > 1e-6 * ext.x()) {
        throw ContractError("grid bounds must be a cube");
    }
}

int VoxelGrid::level_count() const { return std::countr_zero(resolution); }

Vec3 VoxelGrid::cell_center(const GridCoord& c) const {
    const double size = cell_size();
    return bounds.lo + size * Vec3(c.i + 0.5, c.j + 0.5, c.k + 0.5);
}

Aabb VoxelGrid::cell_box(const GridCoord& c) const {
    const double size = cell_size();
    const Vec3 lo = bounds.lo + size * Vec3(c.i, c.j, c.k);
    const Vec3 hi = bounds.lo + size * Vec3(c.i + 1.0, c.j + 1.0, c.k + 1.0);
    return {lo, hi};
}

std::optional<GridCoord> VoxelGrid::cell_of(const Vec3& p) const {
    if (!p.allFinite() || !bounds.contains(p)) {
        return std::nullopt;
    }
    const Vec3 rel = (p - bounds.lo) / cell_size();
    const auto clamp_axis = [this](double v) {
        return static_cast<std::uint32_t>(std::min<double>(std::floor(v), resolution - 1));
    };
    return GridCoord{clamp_axis(rel.x()), clamp_axis(rel.y()), clamp_axis(rel.z())};
}

void VoxelSet::validate() const {
    grid.validate();
    if (cells.empty()) {
        throw ContractError("voxel set is empty");
    }
    std::vector<std::uint64_t> codes;
    codes.reserve(cells.size());
    for (const GridCoord& c : cells) {
        if (!grid.contains(c)) {
            throw ContractError(fmt::format("cell ({}, {}, {}) outside a {}^3 grid", c.i, c.j, c.k, grid.resolution));
        }
        codes.push_back(morton_encode_unchecked(c.i, c.j, c.k));
    }
    std::sort(codes.begin(), codes.end());
    if (std::adjacent_find(codes.begin(), codes.end()) != codes.end()) {
        throw ContractError("voxel set contains duplicate cells");
    }
}

}  // namespace nvo
