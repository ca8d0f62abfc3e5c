// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/renderer.hpp"

#include "nvo/error.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include <chrono>

#include <fmt/format.h>

namespace nvo {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

void RenderOptions::validate() const {
    if (!(early_stop > 0.0 && early_stop < 1.0)) {
        throw ContractError(fmt::format("early stop threshold must lie in (0, 1), got {}", early_stop));
    }
    if (!(depth_density_threshold >= 0.0)) {
        throw ContractError("depth density threshold must be non-negative");
    }
}

RayHit<double> make_hit(std::uint32_t flut_index, double t_enter, double t_exit, const Vec3& direction,
                        std::span<const Quat> rotations, int sh_degree) {
    RayHit<double> hit;
    hit.flut_index = flut_index;
    hit.t_enter = t_enter;
    hit.delta = t_exit - t_enter;
    Vec3 d = direction;
    if (!rotations.empty()) {
        d = rotations[flut_index].conjugate() * direction;
    }
    eval_sh<double>(d.x(), d.y(), d.z(), sh_degree, hit.basis.data());
    return hit;
}

RayResult integrate_ray(const VoxelOctree& octree, const Flut& flut, const Ray& ray,
                        std::span<const Quat> rotations, const RenderOptions& options, IntegrationTrace* trace) {
    const ParamTable<float> table = param_table(flut);
    const double stop_alpha = options.early_stop_enabled ? 1.0 - options.early_stop : 2.0;
    RayAccumulator<double> acc;
    std::array<double, kMaxChannels> value{};
    RayResult result;
    result.channels = flut.channels();
    if (trace) {
        trace->clear();
    }
    octree.for_each_segment(ray, 0.0, std::numeric_limits<double>::infinity(),
                            [&](std::uint32_t index, double t0, double t1) {
                                const RayHit<double> hit =
                                    make_hit(index, t0, t1, ray.direction, rotations, flut.sh_degree());
                                shade(table, index, hit.basis.data(), value.data());
                                const double sigma = table.density(index);
                                const double before = acc.transmittance;
                                const double weight = acc.add(sigma, hit.delta, value.data(), table.channels);
                                if (trace) {
                                    trace->push_back({index, hit.delta, weight, before});
                                }
                                if (sigma > options.depth_density_threshold && std::isinf(result.depth)) {
                                    result.depth = t0;
                                }
                                return !(acc.alpha > stop_alpha);
                            });
    result.feature = acc.feature;
    result.alpha = acc.alpha;
    return result;
}

Image FrameBuffers::premultiplied_rgba() const {
    Image image(width, height, 4);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * width + x;
            for (int c = 0; c < 3 && c < channels; ++c) {
                image.at(x, y, c) = feature[p * channels + c];
            }
            image.at(x, y, 3) = alpha[p];
        }
    }
    return image;
}

PosedVolume pose_asset(const Asset& asset, const Pose& pose, StageTimings* timings) {
    auto start = Clock::now();
    const WarpResult warp = warp_voxels(asset.voxels, asset.weights, asset.skeleton, pose);
    PosedVolume volume;
    volume.resolved = resolve_collisions(warp, asset.flut);
    volume.rotations = warp.rotations;
    if (timings) {
        timings->warp_ms = elapsed_ms(start);
    }
    if (volume.resolved.cells.empty()) {
        throw Error(ErrorCategory::kOutOfBounds,
                    fmt::format("all {} voxels left the grid in this pose", asset.voxels.size()));
    }
    start = Clock::now();
    volume.octree = build_octree(asset.voxels.grid, volume.resolved.cells, volume.resolved.flut_indices);
    if (timings) {
        timings->build_ms = elapsed_ms(start);
    }
    return volume;
}

FrameBuffers render_volume(const PosedVolume& volume, const Flut& flut, const Camera& camera,
                           const RenderOptions& options) {
    options.validate();
    camera.validate();
    FrameBuffers fb;
    fb.width = camera.width;
    fb.height = camera.height;
    fb.channels = flut.channels();
    fb.feature.assign(fb.pixel_count() * fb.channels, 0.0f);
    fb.alpha.assign(fb.pixel_count(), 0.0f);
    fb.depth.assign(fb.pixel_count(), std::numeric_limits<float>::infinity());
    tbb::parallel_for(tbb::blocked_range<int>(0, camera.height), [&](const tbb::blocked_range<int>& rows) {
        for (int y = rows.begin(); y != rows.end(); ++y) {
            for (int x = 0; x < camera.width; ++x) {
                const Ray ray = ray_from_pixel(camera, Vec2(x, y));
                const RayResult r = integrate_ray(volume.octree, flut, ray, volume.rotations, options);
                const std::size_t p = static_cast<std::size_t>(y) * fb.width + x;
                for (int c = 0; c < fb.channels; ++c) {
                    double v = r.feature[c];
                    if (options.background && c < 3) {
                        v += (1.0 - r.alpha) * (*options.background)[c];
                    }
                    fb.feature[p * fb.channels + c] = static_cast<float>(v);
                }
                fb.alpha[p] = static_cast<float>(r.alpha);
                fb.depth[p] = static_cast<float>(r.depth);
            }
        }
    });
    return fb;
}

FrameBuffers render_frame(const Asset& asset, const Pose& pose, const Camera& camera,
                          const RenderOptions& options, StageTimings* timings) {
    const PosedVolume volume = pose_asset(asset, pose, timings);
    const auto start = Clock::now();
    FrameBuffers fb = render_volume(volume, asset.flut, camera, options);
    if (timings) {
        timings->render_ms = elapsed_ms(start);
    }
    return fb;
}

Image composite(const FrameBuffers& fg, const Image& bg_color, const Image& bg_depth) {
    if (bg_color.width() != fg.width || bg_color.height() != fg.height || bg_depth.width() != fg.width ||
        bg_depth.height() != fg.height) {
        throw ContractError(fmt::format("composite size mismatch: foreground {}x{}, background {}x{}, depth {}x{}",
                                        fg.width, fg.height, bg_color.width(), bg_color.height(), bg_depth.width(),
                                        bg_depth.height()));
    }
    if (bg_color.channels() != 3 && bg_color.channels() != 4) {
        throw ContractError("background color needs 3 or 4 channels");
    }
    if (bg_depth.channels() != 1) {
        throw ContractError("background depth needs 1 channel");
    }
    Image out = bg_color;
    const int color_channels = std::min(3, fg.channels);
    for (int y = 0; y < fg.height; ++y) {
        for (int x = 0; x < fg.width; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * fg.width + x;
            if (!(fg.depth[p] <= bg_depth.at(x, y, 0))) {
                continue;
            }
            const float a = fg.alpha[p];
            for (int c = 0; c < 3; ++c) {
                const float f = c < color_channels ? fg.feature[p * fg.channels + c] : 0.0f;
                out.at(x, y, c) = f + (1.0f - a) * bg_color.at(x, y, c);
            }
            if (out.channels() == 4) {
                out.at(x, y, 3) = 1.0f - (1.0f - a) * (1.0f - bg_color.at(x, y, 3));
            }
        }
    }
    return out;
}

}  // namespace nvo
