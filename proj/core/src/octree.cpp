// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/octree.hpp"

#include "nvo/error.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/parallel_reduce.h>
#include <tbb/parallel_sort.h>

#include <algorithm>
#include <bit>
#include <limits>

#include <fmt/format.h>

namespace nvo {
namespace {

constexpr std::size_t kGrain = 4096;

// Length of the common prefix of keys i and j; -1 outside the array.
inline int common_prefix(std::span<const OctreeLeaf> leaves, std::int64_t i, std::int64_t j) {
    if (j < 0 || j >= static_cast<std::int64_t>(leaves.size())) {
        return -1;
    }
    return std::countl_zero(leaves[i].morton ^ leaves[j].morton);
}

// Box shared by all codes with the given prefix length.
void prefix_box(std::uint64_t code, int prefix, OctreeNode& node) {
    const int free_bits = 64 - prefix;
    const std::uint64_t mask = free_bits >= 64 ? 0 : ~((std::uint64_t{1} << free_bits) - 1);
    node.box_lo = morton_decode(code & mask);
    // Bit b belongs to axis b % 3.
    node.box_log_size = {static_cast<std::uint8_t>((free_bits + 2) / 3), static_cast<std::uint8_t>((free_bits + 1) / 3),
                         static_cast<std::uint8_t>(free_bits / 3)};
}

// Internal node i of the radix tree over sorted unique keys.
OctreeNode link_node(std::span<const OctreeLeaf> leaves, std::int64_t i) {
    const int d = common_prefix(leaves, i, i + 1) - common_prefix(leaves, i, i - 1) > 0 ? 1 : -1;
    const int delta_min = common_prefix(leaves, i, i - d);
    std::int64_t l_max = 2;
    while (common_prefix(leaves, i, i + l_max * d) > delta_min) {
        l_max *= 2;
    }
    std::int64_t l = 0;
    for (std::int64_t t = l_max / 2; t >= 1; t /= 2) {
        if (common_prefix(leaves, i, i + (l + t) * d) > delta_min) {
            l += t;
        }
    }
    const std::int64_t j = i + l * d;
    const int delta_node = common_prefix(leaves, i, j);
    std::int64_t s = 0;
    for (std::int64_t div = 2;; div *= 2) {
        const std::int64_t t = (l + div - 1) / div;
        if (common_prefix(leaves, i, i + (s + t) * d) > delta_node) {
            s += t;
        }
        if (t <= 1) {
            break;
        }
    }
    const std::int64_t gamma = i + s * d + std::min(d, 0);
    const std::int64_t first = std::min(i, j);
    const std::int64_t last = std::max(i, j);

    OctreeNode node;
    node.first = static_cast<std::uint32_t>(first);
    node.last = static_cast<std::uint32_t>(last);
    node.split = static_cast<std::uint32_t>(gamma);
    node.left = static_cast<std::uint32_t>(gamma) | (first == gamma ? OctreeNode::kLeafFlag : 0u);
    node.right = static_cast<std::uint32_t>(gamma + 1) | (last == gamma + 1 ? OctreeNode::kLeafFlag : 0u);
    node.split_axis = static_cast<std::uint8_t>((63 - delta_node) % 3);
    prefix_box(leaves[first].morton, delta_node, node);
    return node;
}

}  // namespace

VoxelOctree::VoxelOctree(VoxelGrid grid, std::vector<OctreeLeaf> leaves, std::vector<OctreeNode> nodes)
    : grid_(std::move(grid)), leaves_(std::move(leaves)), nodes_(std::move(nodes)) {}

std::optional<std::uint32_t> VoxelOctree::query_point(const Vec3& p) const {
    if (leaves_.empty()) {
        return std::nullopt;
    }
    const auto cell = grid_.cell_of(p);
    if (!cell) {
        return std::nullopt;
    }
    const std::uint64_t code = morton_encode_unchecked(cell->i, cell->j, cell->k);
    std::uint32_t ref = nodes_.empty() ? OctreeNode::kLeafFlag : 0u;
    while (!(ref & OctreeNode::kLeafFlag)) {
        const OctreeNode& node = nodes_[ref];
        ref = code <= leaves_[node.split].morton ? node.left : node.right;
    }
    const OctreeLeaf& leaf = leaves_[ref & ~OctreeNode::kLeafFlag];
    if (leaf.morton != code) {
        return std::nullopt;
    }
    return leaf.flut_index;
}

VoxelOctree::RayFrame VoxelOctree::make_frame(const Ray& ray) const {
    RayFrame frame;
    frame.origin = ray.origin;
    for (int a = 0; a < 3; ++a) {
        const double d = ray.direction[a];
        frame.parallel[a] = d == 0.0;
        frame.negative[a] = d < 0.0;
        frame.inv_dir[a] = d == 0.0 ? 0.0 : 1.0 / d;
    }
    return frame;
}

bool VoxelOctree::clip_box(const RayFrame& frame, const Vec3& lo, const Vec3& hi, double& t0, double& t1) const {
    for (int a = 0; a < 3; ++a) {
        if (frame.parallel[a]) {
            if (frame.origin[a] < lo[a] || frame.origin[a] > hi[a]) {
                return false;
            }
            continue;
        }
        double near = (lo[a] - frame.origin[a]) * frame.inv_dir[a];
        double far = (hi[a] - frame.origin[a]) * frame.inv_dir[a];
        if (frame.negative[a]) {
            std::swap(near, far);
        }
        t0 = std::max(t0, near);
        t1 = std::min(t1, far);
    }
    return t0 <= t1;
}

bool VoxelOctree::clip_leaf(const RayFrame& frame, std::uint32_t leaf, double& t0, double& t1) const {
    const GridCoord c = morton_decode(leaves_[leaf].morton);
    const double size = grid_.cell_size();
    const Vec3& origin = grid_.bounds.lo;
    const Vec3 lo = origin + size * Vec3(c.i, c.j, c.k);
    const Vec3 hi = origin + size * Vec3(c.i + 1.0, c.j + 1.0, c.k + 1.0);
    return clip_box(frame, lo, hi, t0, t1) && t1 > t0;
}

bool VoxelOctree::clip_node(const RayFrame& frame, const OctreeNode& node, double& t0, double& t1) const {
    const double size = grid_.cell_size();
    const Vec3& origin = grid_.bounds.lo;
    const GridCoord& c = node.box_lo;
    const Vec3 lo = origin + size * Vec3(c.i, c.j, c.k);
    const Vec3 hi = origin + size * Vec3(static_cast<double>(c.i) + (std::uint64_t{1} << node.box_log_size[0]),
                                         static_cast<double>(c.j) + (std::uint64_t{1} << node.box_log_size[1]),
                                         static_cast<double>(c.k) + (std::uint64_t{1} << node.box_log_size[2]));
    return clip_box(frame, lo, hi, t0, t1);
}

RaySegmentList VoxelOctree::traverse_ray(const Ray& ray, double t_min, double t_max) const {
    RaySegmentList out;
    for_each_segment(ray, t_min, t_max, [&out](std::uint32_t index, double t0, double t1) {
        out.push_back({index, t0, t1});
        return true;
    });
    return out;
}

VoxelOctree build_octree(const VoxelGrid& grid, std::span<const GridCoord> cells,
                         std::span<const std::uint32_t> flut_indices) {
    grid.validate();
    if (cells.empty()) {
        throw ContractError("cannot build an octree without cells");
    }
    if (cells.size() != flut_indices.size()) {
        throw ContractError("cell and flut index lists differ in length");
    }
    if (cells.size() >= OctreeNode::kLeafFlag) {
        throw ContractError("too many cells for 31-bit leaf references");
    }
    const std::size_t n = cells.size();
    std::vector<OctreeLeaf> leaves(n);
    const bool in_grid = tbb::parallel_reduce(
        tbb::blocked_range<std::size_t>(0, n, kGrain), true,
        [&](const tbb::blocked_range<std::size_t>& r, bool ok) {
            for (std::size_t i = r.begin(); i != r.end(); ++i) {
                ok &= grid.contains(cells[i]);
                leaves[i] = {morton_encode_unchecked(cells[i].i, cells[i].j, cells[i].k), flut_indices[i]};
            }
            return ok;
        },
        [](bool a, bool b) { return a && b; });
    if (!in_grid) {
        throw ContractError("cell outside the grid");
    }
    tbb::parallel_sort(leaves.begin(), leaves.end(),
                       [](const OctreeLeaf& a, const OctreeLeaf& b) { return a.morton < b.morton; });
    const std::size_t duplicate = tbb::parallel_reduce(
        tbb::blocked_range<std::size_t>(1, std::max<std::size_t>(n, 1), kGrain), n,
        [&](const tbb::blocked_range<std::size_t>& r, std::size_t found) {
            for (std::size_t i = r.begin(); i != r.end(); ++i) {
                if (leaves[i].morton == leaves[i - 1].morton) {
                    found = std::min(found, i);
                }
            }
            return found;
        },
        [](std::size_t a, std::size_t b) { return std::min(a, b); });
    if (duplicate != n) {
        const GridCoord c = morton_decode(leaves[duplicate].morton);
        throw ContractError(fmt::format("duplicate cell ({}, {}, {}); resolve collisions before building", c.i, c.j, c.k));
    }

    std::vector<OctreeNode> nodes(n - 1);
    const std::span<const OctreeLeaf> sorted(leaves);
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n - 1, kGrain), [&](const tbb::blocked_range<std::size_t>& r) {
        for (std::size_t i = r.begin(); i != r.end(); ++i) {
            nodes[i] = link_node(sorted, static_cast<std::int64_t>(i));
        }
    });
    return VoxelOctree(grid, std::move(leaves), std::move(nodes));
}

VoxelOctree build_octree(const VoxelSet& voxels) {
    std::vector<std::uint32_t> indices(voxels.cells.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        indices[i] = static_cast<std::uint32_t>(i);
    }
    return build_octree(voxels.grid, voxels.cells, indices);
}

}  // namespace nvo
