// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/camera.hpp"
#include "nvo/voxel_set.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace nvo {

struct OctreeLeaf {
    std::uint64_t morton = 0;
    std::uint32_t flut_index = 0;

    friend bool operator==(const OctreeLeaf&, const OctreeLeaf&) = default;
};

/// Internal radix node over the sorted leaf range [first, last]. Child
/// references with kLeafFlag set index the leaf array.
struct OctreeNode {
    static constexpr std::uint32_t kLeafFlag = 0x80000000u;

    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t first = 0;
    std::uint32_t last = 0;
    /// Index of the leaf ending the left child's range.
    std::uint32_t split = 0;
    /// Axis (0 = x) of the first bit distinguishing the two children.
    std::uint8_t split_axis = 0;
    /// Box of all codes sharing the node's prefix, in cells: origin and
    /// log2 extent per axis.
    GridCoord box_lo;
    std::array<std::uint8_t, 3> box_log_size{};

    friend bool operator==(const OctreeNode&, const OctreeNode&) = default;
};

struct RaySegment {
    std::uint32_t flut_index = 0;
    double t_enter = 0.0;
    double t_exit = 0.0;

    double length() const { return t_exit - t_enter; }
};

using RaySegmentList = std::vector<RaySegment>;

/// Sparse voxel index: Morton-sorted unit-cell leaves linked by a binary
/// radix tree. Immutable after construction.
class VoxelOctree {
public:
    VoxelOctree() = default;
    VoxelOctree(VoxelGrid grid, std::vector<OctreeLeaf> leaves, std::vector<OctreeNode> nodes);

    const VoxelGrid& grid() const { return grid_; }
    std::span<const OctreeLeaf> leaves() const { return leaves_; }
    std::span<const OctreeNode> nodes() const { return nodes_; }
    std::size_t size() const { return leaves_.size(); }

    /// FLUT index of the leaf containing p; nullopt outside the bounds or in
    /// empty space. Descends the radix tree.
    std::optional<std::uint32_t> query_point(const Vec3& p) const;

    /// Calls fn(flut_index, t_enter, t_exit) for every occupied leaf the ray
    /// pierces inside [t_min, t_max], front to back. Zero-length touches are
    /// skipped. fn returns false to stop.
    template <typename Fn>
    void for_each_segment(const Ray& ray, double t_min, double t_max, Fn&& fn) const;

    RaySegmentList traverse_ray(const Ray& ray, double t_min, double t_max) const;

private:
    struct RayFrame {
        Vec3 origin;
        Vec3 inv_dir;
        std::array<bool, 3> parallel;
        std::array<bool, 3> negative;
    };

    RayFrame make_frame(const Ray& ray) const;
    bool clip_box(const RayFrame& frame, const Vec3& lo, const Vec3& hi, double& t0, double& t1) const;
    bool clip_leaf(const RayFrame& frame, std::uint32_t leaf, double& t0, double& t1) const;
    bool clip_node(const RayFrame& frame, const OctreeNode& node, double& t0, double& t1) const;

    VoxelGrid grid_;
    std::vector<OctreeLeaf> leaves_;
    std::vector<OctreeNode> nodes_;
};

/// Builds the tree over cells[i] -> flut_indices[i]. Output is identical for
/// every thread count. Throws ContractError on empty input, mismatched
/// lengths or out-of-grid cells, and on duplicate cells (resolve collisions
/// first).
VoxelOctree build_octree(const VoxelGrid& grid, std::span<const GridCoord> cells,
                         std::span<const std::uint32_t> flut_indices);

/// Tree over a voxel set with flut index = cell position.
VoxelOctree build_octree(const VoxelSet& voxels);

// --- implementation -------------------------------------------------------

template <typename Fn>
void VoxelOctree::for_each_segment(const Ray& ray, double t_min, double t_max, Fn&& fn) const {
    if (leaves_.empty() || !(t_min < t_max)) {
        return;
    }
    const RayFrame frame = make_frame(ray);
    if (nodes_.empty()) {
        double t0 = t_min, t1 = t_max;
        if (clip_leaf(frame, 0, t0, t1)) {
            fn(leaves_[0].flut_index, t0, t1);
        }
        return;
    }
    // Radix depth is bounded by the 63 code bits.
    std::array<std::uint32_t, 128> stack;
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const std::uint32_t ref = stack[--top];
        double t0 = t_min, t1 = t_max;
        if (ref & OctreeNode::kLeafFlag) {
            const std::uint32_t leaf = ref & ~OctreeNode::kLeafFlag;
            if (clip_leaf(frame, leaf, t0, t1)) {
                if (!fn(leaves_[leaf].flut_index, t0, t1)) {
                    return;
                }
            }
            continue;
        }
        const OctreeNode& node = nodes_[ref];
        if (!clip_node(frame, node, t0, t1)) {
            continue;
        }
        // The children lie on either side of an axis-aligned plane; push the
        // far side first.
        if (frame.negative[node.split_axis]) {
            stack[top++] = node.left;
            stack[top++] = node.right;
        } else {
            stack[top++] = node.right;
            stack[top++] = node.left;
        }
    }
}

}  // namespace nvo
