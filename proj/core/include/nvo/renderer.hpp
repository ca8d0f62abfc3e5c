// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/asset.hpp"
#include "nvo/camera.hpp"
#include "nvo/flut.hpp"
#include "nvo/image.hpp"
#include "nvo/octree.hpp"
#include "nvo/ray_integral.hpp"
#include "nvo/warp.hpp"

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace nvo {

struct RenderOptions {
    /// Integration stops once accumulated alpha exceeds 1 - early_stop.
    double early_stop = 0.01;
    bool early_stop_enabled = true;
    /// Depth is the entry distance of the first voxel denser than this.
    double depth_density_threshold = 5.0;
    /// Optional opaque background composited behind the premultiplied
    /// feature map (first three channels). Alpha is left untouched.
    std::optional<std::array<float, 3>> background;

    /// Throws ContractError unless 0 < early_stop < 1 and the depth
    /// threshold is non-negative.
    void validate() const;
};

struct TraceRecord {
    std::uint32_t flut_index = 0;
    double delta = 0.0;
    double alpha = 0.0;
    /// Transmittance before entering the voxel.
    double transmittance = 1.0;
};

using IntegrationTrace = std::vector<TraceRecord>;

struct RayResult {
    std::array<double, kMaxChannels> feature{};
    int channels = 0;
    double alpha = 0.0;
    double depth = std::numeric_limits<double>::infinity();
};

/// One pierced segment as a ray hit: the ray direction is rotated into the
/// voxel's canonical frame (R^-1 d) and the SH basis evaluated there.
RayHit<double> make_hit(std::uint32_t flut_index, double t_enter, double t_exit, const Vec3& direction,
                        std::span<const Quat> rotations, int sh_degree);

/// Integrates one ray through a posed octree. `rotations` holds R_i^t per
/// FLUT entry (empty = identity); the ray direction is taken into each
/// voxel's canonical frame before the SH lookup.
RayResult integrate_ray(const VoxelOctree& octree, const Flut& flut, const Ray& ray,
                        std::span<const Quat> rotations, const RenderOptions& options,
                        IntegrationTrace* trace = nullptr);

/// Per-pixel premultiplied feature map, coarse alpha and depth.
struct FrameBuffers {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> feature;
    std::vector<float> alpha;
    std::vector<float> depth;

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    /// RGBA image with premultiplied color (first three feature channels).
    Image premultiplied_rgba() const;

    friend bool operator==(const FrameBuffers&, const FrameBuffers&) = default;
};

/// A warped, collision-resolved and re-indexed asset for one pose.
struct PosedVolume {
    VoxelOctree octree;
    std::vector<Quat> rotations;
    ResolvedVoxels resolved;
};

/// Wall-clock milliseconds per stage of one frame.
struct StageTimings {
    double warp_ms = 0.0;
    double build_ms = 0.0;
    double render_ms = 0.0;
};

/// Warps, resolves collisions and rebuilds the octree. Throws Error
/// (kOutOfBounds) when every voxel leaves the grid.
PosedVolume pose_asset(const Asset& asset, const Pose& pose, StageTimings* timings = nullptr);

FrameBuffers render_volume(const PosedVolume& volume, const Flut& flut, const Camera& camera,
                           const RenderOptions& options);

FrameBuffers render_frame(const Asset& asset, const Pose& pose, const Camera& camera,
                          const RenderOptions& options, StageTimings* timings = nullptr);

/// Depth-aware blend with a rasterized background: where the foreground is
/// not farther, out = F + (1 - A) * bg, otherwise bg. bg_color has 3 or 4
/// channels (alpha passes through as 1 - (1 - A)(1 - bg_a) on the front
/// branch), bg_depth one channel. Throws ContractError on size mismatch.
Image composite(const FrameBuffers& fg, const Image& bg_color, const Image& bg_depth);

}  // namespace nvo
