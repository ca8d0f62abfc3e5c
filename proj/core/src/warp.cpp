// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/warp.hpp"

#include "nvo/error.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/parallel_sort.h>

#include <utility>

namespace nvo {

WarpResult warp_voxels(const VoxelSet& voxels, const SkinWeights& weights, const Skeleton& skeleton,
                       const Pose& pose) {
    if (weights.size() != voxels.size()) {
        throw ContractError("skin weights do not match the voxel count");
    }
    pose.validate(skeleton.size());
    const std::vector<RigidTransform> live = forward_kinematics(skeleton, pose);
    std::vector<RigidTransform> skin(skeleton.size());
    std::vector<Eigen::Matrix<double, 3, 4>> skin_matrix(skeleton.size());
    for (std::size_t j = 0; j < skeleton.size(); ++j) {
        skin[j] = live[j] * skeleton.canonical_globals()[j].inverse();
        skin_matrix[j] = skin[j].matrix().topRows<3>();
    }

    const std::size_t n = voxels.size();
    WarpResult out;
    out.positions.resize(n);
    out.cells.resize(n);
    out.in_bounds.assign(n, 0);
    out.rotations.resize(n);
    const VoxelGrid& grid = voxels.grid;
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, 1024), [&](const tbb::blocked_range<std::size_t>& r) {
        for (std::size_t i = r.begin(); i != r.end(); ++i) {
            const Eigen::Vector4d p = voxels.center(i).homogeneous();
            // Stored weights are float; dividing by their sum keeps the
            // identity pose exact to double precision.
            Vec3 q = Vec3::Zero();
            double total = 0.0;
            for (const JointWeight& jw : weights.of(i)) {
                q += static_cast<double>(jw.weight) * (skin_matrix[jw.joint] * p);
                total += jw.weight;
            }
            q /= total;
            out.positions[i] = q;
            out.rotations[i] = skin[weights.dominant_joint(i)].rotation();
            if (const auto cell = grid.cell_of(q)) {
                out.cells[i] = *cell;
                out.in_bounds[i] = 1;
            }
        }
    });

    std::vector<std::pair<std::uint64_t, std::uint32_t>> keys;
    keys.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (out.in_bounds[i]) {
            keys.emplace_back(morton_encode_unchecked(out.cells[i].i, out.cells[i].j, out.cells[i].k),
                              static_cast<std::uint32_t>(i));
        } else {
            ++out.out_of_bounds;
        }
    }
    tbb::parallel_sort(keys.begin(), keys.end());
    for (std::size_t a = 0; a < keys.size();) {
        std::size_t b = a + 1;
        while (b < keys.size() && keys[b].first == keys[a].first) {
            ++b;
        }
        if (b - a > 1) {
            auto& group = out.collision_groups.emplace_back();
            for (std::size_t m = a; m < b; ++m) {
                group.push_back(keys[m].second);
            }
        }
        a = b;
    }
    return out;
}

ResolvedVoxels resolve_collisions(const WarpResult& warp, const Flut& flut) {
    const std::size_t n = warp.cells.size();
    if (flut.size() != n || warp.in_bounds.size() != n) {
        throw ContractError("warp result does not match the FLUT length");
    }
    std::vector<std::uint8_t> keep(warp.in_bounds);
    ResolvedVoxels out;
    for (const auto& group : warp.collision_groups) {
        std::uint32_t winner = group.front();
        for (const std::uint32_t member : group) {
            if (flut.density(member) > flut.density(winner)) {
                winner = member;
            }
        }
        for (const std::uint32_t member : group) {
            if (member != winner) {
                keep[member] = 0;
                out.pairs.push_back({winner, member});
            }
        }
    }
    out.dropped_out_of_bounds = warp.out_of_bounds;
    for (std::size_t i = 0; i < n; ++i) {
        if (keep[i]) {
            out.cells.push_back(warp.cells[i]);
            out.flut_indices.push_back(static_cast<std::uint32_t>(i));
        }
    }
    return out;
}

}  // namespace nvo
