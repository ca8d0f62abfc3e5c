// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/flut.hpp"
#include "nvo/skeleton.hpp"
#include "nvo/skinning.hpp"
#include "nvo/voxel_set.hpp"

#include <cstdint>
#include <vector>

namespace nvo {

struct WarpResult {
    /// Live position p^t of every canonical voxel.
    std::vector<Vec3> positions;
    /// Quantized live cell (meaningful only where in_bounds is set).
    std::vector<GridCoord> cells;
    std::vector<std::uint8_t> in_bounds;
    /// R_i^t: rotation of the voxel's dominant joint transform.
    std::vector<Quat> rotations;
    /// Canonical voxels sharing a live cell; each group has >= 2 members,
    /// listed in ascending order. Groups are ordered by live Morton code.
    std::vector<std::vector<std::uint32_t>> collision_groups;
    std::size_t out_of_bounds = 0;
};

/// Linear blend skinning of the canonical cell centers into the pose.
/// Voxels leaving the grid are flagged, never wrapped.
WarpResult warp_voxels(const VoxelSet& voxels, const SkinWeights& weights, const Skeleton& skeleton,
                       const Pose& pose);

struct CollisionPair {
    std::uint32_t winner = 0;
    std::uint32_t loser = 0;

    friend bool operator==(const CollisionPair&, const CollisionPair&) = default;
};

/// Live cell assignment with one voxel per cell.
struct ResolvedVoxels {
    std::vector<GridCoord> cells;
    std::vector<std::uint32_t> flut_indices;
    std::vector<CollisionPair> pairs;
    std::size_t dropped_out_of_bounds = 0;
};

/// Per contested cell the highest-density voxel wins (ties: lowest index);
/// every (winner, loser) pair is reported. Output is sorted by canonical index.
ResolvedVoxels resolve_collisions(const WarpResult& warp, const Flut& flut);

}  // namespace nvo
