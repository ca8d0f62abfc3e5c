// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/fitter.hpp"

#include "nvo/error.hpp"
#include "nvo/renderer.hpp"

#include <tbb/blocked_range.h>
#include <tbb/enumerable_thread_specific.h>
#include <tbb/parallel_for.h>

#include <chrono>
#include <cmath>
#include <optional>
#include <random>

#include <fmt/format.h>

namespace nvo {

void FitDataset::validate() const {
    if (cameras.empty()) {
        throw ContractError("dataset has no cameras");
    }
    if (frames.empty()) {
        throw ContractError("dataset has no frames");
    }
    for (const Camera& camera : cameras) {
        camera.validate();
    }
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const FitFrame& frame = frames[f];
        if (frame.images.size() != cameras.size()) {
            throw ContractError(fmt::format("frame {} has {} images for {} cameras", f, frame.images.size(),
                                            cameras.size()));
        }
        for (std::size_t c = 0; c < cameras.size(); ++c) {
            const Image& image = frame.images[c];
            if (image.width() != cameras[c].width || image.height() != cameras[c].height) {
                throw ContractError(fmt::format("frame {} image {} is {}x{}, camera expects {}x{}", f, c,
                                                image.width(), image.height(), cameras[c].width, cameras[c].height));
            }
            if (image.channels() < 2) {
                throw ContractError(fmt::format("frame {} image {} needs color and alpha channels", f, c));
            }
        }
    }
    if (train_cameras.empty()) {
        throw ContractError("dataset has no training cameras");
    }
    for (const std::size_t c : train_cameras) {
        if (c >= cameras.size()) {
            throw ContractError(fmt::format("training camera {} does not exist", c));
        }
    }
    for (const std::size_t c : probe_cameras) {
        if (c >= cameras.size()) {
            throw ContractError(fmt::format("probe camera {} does not exist", c));
        }
    }
    if (probe_frame >= frames.size()) {
        throw ContractError("probe frame does not exist");
    }
}

void FitConfig::validate() const {
    if (rays_per_batch < 1) {
        throw ContractError("rays per batch must be at least 1");
    }
    if (!(lambda_vrt >= 0.0)) {
        throw ContractError("lambda_vrt must be non-negative");
    }
    if (!(adam.learning_rate > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
        !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0)) {
        throw ContractError("learning rate must be positive and moment decays in [0, 1)");
    }
    if (!(l1_deadzone >= 0.0)) {
        throw ContractError("dead zone must be non-negative");
    }
    if (probe_interval < 1) {
        throw ContractError("probe interval must be at least 1");
    }
}

Flut initialize_flut(std::size_t entries, int sh_degree, int channels, double cell_size, std::uint64_t seed) {
    Flut flut(entries, sh_degree, channels);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> noise(-0.01f, 0.01f);
    double y0 = 0.0;
    eval_sh<double>(0.0, 0.0, 1.0, 0, &y0);
    const float mid = static_cast<float>(0.5 / y0);
    const float sigma = static_cast<float>(0.1 / cell_size);
    for (std::size_t i = 0; i < entries; ++i) {
        for (int h = 0; h < flut.basis_count(); ++h) {
            for (int c = 0; c < channels; ++c) {
                const float n = noise(rng);
                flut.coefficient(i, h, c) = h == 0 ? mid : n;
            }
        }
        flut.density(i) = sigma;
    }
    return flut;
}

TracedRay trace_ray(const VoxelOctree& octree, const Flut& flut, const Ray& ray, std::span<const Quat> rotations) {
    TracedRay traced;
    octree.for_each_segment(ray, 0.0, std::numeric_limits<double>::infinity(),
                            [&](std::uint32_t index, double t0, double t1) {
                                traced.hits.push_back(
                                    make_hit(index, t0, t1, ray.direction, rotations, flut.sh_degree()));
                                return true;
                            });
    const auto acc = integrate_hits<double>(traced.hits, param_table(flut));
    traced.prediction.color = acc.feature;
    traced.prediction.alpha = acc.alpha;
    return traced;
}

RayResidual l1_residual(const RaySample& pred, const RaySample& gt, int channels, double scale, double deadzone) {
    const auto sign = [&](double diff) {
        if (std::abs(diff) <= deadzone) {
            return 0.0;
        }
        return diff > 0.0 ? scale : -scale;
    };
    RayResidual r;
    for (int c = 0; c < channels; ++c) {
        r.d_color[c] = sign(pred.color[c] - gt.color[c]);
    }
    r.d_alpha = sign(pred.alpha - gt.alpha);
    return r;
}

namespace {

struct HitGradient {
    double weight;
    double dsigma;
};

void scatter_ray(const TracedRay& ray, std::span<const HitGradient> hits, const RayResidual& residual, int basis_count,
                 int channels, GradBuffer& grad) {
    for (std::size_t i = 0; i < hits.size(); ++i) {
        const RayHit<double>& hit = ray.hits[i];
        const auto block = grad.touch(hit.flut_index);
        for (int h = 0; h < basis_count; ++h) {
            for (int c = 0; c < channels; ++c) {
                block[h * channels + c] += coefficient_gradient(hit, hits[i].weight, residual.d_color.data(), h, c);
            }
        }
        block[basis_count * channels] += hits[i].dsigma;
    }
}

bool is_zero(const RayResidual& r, int channels) {
    if (r.d_alpha != 0.0) {
        return false;
    }
    for (int c = 0; c < channels; ++c) {
        if (r.d_color[c] != 0.0) {
            return false;
        }
    }
    return true;
}

void backprop_into(const TracedRay& ray, const RayResidual& residual, const ParamTable<float>& table,
                   std::vector<HitGradient>& out) {
    out.resize(ray.hits.size());
    backprop_hits<double>(ray.hits, table, residual.d_color.data(), residual.d_alpha,
                          [&](std::size_t i, double weight, double dsigma) {
                              out[i] = {weight, dsigma};
                          });
}

}  // namespace

void backward(std::span<const TracedRay> rays, std::span<const RayResidual> residuals, const Flut& flut,
              GradBuffer& grad, ReductionMode mode) {
    if (rays.size() != residuals.size()) {
        throw ContractError("one residual per traced ray is required");
    }
    if (grad.entries() != flut.size() || grad.stride() != flut.stride()) {
        throw ContractError("gradient buffer does not match the FLUT layout");
    }
    const ParamTable<float> table = param_table(flut);
    const int basis_count = flut.basis_count();
    const int channels = flut.channels();
    if (mode == ReductionMode::kDeterministic) {
        std::vector<std::vector<HitGradient>> per_ray(rays.size());
        tbb::parallel_for(tbb::blocked_range<std::size_t>(0, rays.size(), 16),
                          [&](const tbb::blocked_range<std::size_t>& r) {
                              for (std::size_t i = r.begin(); i != r.end(); ++i) {
                                  if (!is_zero(residuals[i], channels)) {
                                      backprop_into(rays[i], residuals[i], table, per_ray[i]);
                                  }
                              }
                          });
        for (std::size_t i = 0; i < rays.size(); ++i) {
            scatter_ray(rays[i], per_ray[i], residuals[i], basis_count, channels, grad);
        }
        return;
    }
    tbb::enumerable_thread_specific<GradBuffer> partial([&] { return GradBuffer(flut.size(), flut.stride()); });
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, rays.size(), 16),
                      [&](const tbb::blocked_range<std::size_t>& r) {
                          GradBuffer& local = partial.local();
                          std::vector<HitGradient> hits;
                          for (std::size_t i = r.begin(); i != r.end(); ++i) {
                              if (is_zero(residuals[i], channels)) {
                                  continue;
                              }
                              backprop_into(rays[i], residuals[i], table, hits);
                              scatter_ray(rays[i], hits, residuals[i], basis_count, channels, local);
                          }
                      });
    for (GradBuffer& local : partial) {
        for (const std::uint32_t entry : local.touched_entries()) {
            const auto src = local.block(entry);
            const auto dst = grad.touch(entry);
            for (std::size_t s = 0; s < src.size(); ++s) {
                dst[s] += src[s];
            }
        }
    }
}

void add_vrt_gradient(std::span<const CollisionPair> pairs, const Flut& flut, double lambda, GradBuffer& grad) {
    if (pairs.empty() || lambda == 0.0) {
        return;
    }
    const int stride = flut.stride();
    const double scale = lambda / (static_cast<double>(pairs.size()) * stride);
    for (const CollisionPair& pair : pairs) {
        const auto a = flut.entry(pair.winner);
        const auto b = flut.entry(pair.loser);
        const auto ga = grad.touch(pair.winner);
        const auto gb = grad.touch(pair.loser);
        for (int s = 0; s < stride; ++s) {
            const double diff = static_cast<double>(a[s]) - static_cast<double>(b[s]);
            const double g = diff > 0.0 ? scale : (diff < 0.0 ? -scale : 0.0);
            ga[s] += g;
            gb[s] -= g;
        }
    }
}

namespace {

using Clock = std::chrono::steady_clock;

/// Pose-dependent state that only changes with the FLUT through collisions.
struct FrameCache {
    WarpResult warp;
    std::optional<PosedVolume> fixed;
};

PosedVolume resolve_volume(const Asset& asset, const FrameCache& cache, const Flut& flut) {
    PosedVolume volume;
    volume.resolved = resolve_collisions(cache.warp, flut);
    volume.rotations = cache.warp.rotations;
    if (volume.resolved.cells.empty()) {
        throw Error(ErrorCategory::kOutOfBounds, "all voxels left the grid in a training pose");
    }
    volume.octree = build_octree(asset.voxels.grid, volume.resolved.cells, volume.resolved.flut_indices);
    return volume;
}

/// The cached volume when the pose has no collisions, otherwise a fresh one in `scratch`.
const PosedVolume& posed_volume(const Asset& asset, const FrameCache& cache, const Flut& flut,
                                PosedVolume& scratch) {
    if (cache.fixed) {
        return *cache.fixed;
    }
    scratch = resolve_volume(asset, cache, flut);
    return scratch;
}

RaySample reference_sample(const Image& image, int x, int y, int channels) {
    RaySample s;
    const int alpha_channel = image.channels() - 1;
    for (int c = 0; c < channels && c < alpha_channel; ++c) {
        s.color[c] = image.at(x, y, c);
    }
    s.alpha = image.at(x, y, alpha_channel);
    return s;
}

double probe_psnr(const FitDataset& dataset, const Asset& asset, const FrameCache& cache, const Flut& flut) {
    if (dataset.probe_cameras.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const std::size_t cam = dataset.probe_cameras.front();
    PosedVolume scratch;
    const PosedVolume& volume = posed_volume(asset, cache, flut, scratch);
    const FrameBuffers fb = render_volume(volume, flut, dataset.cameras[cam], RenderOptions{});
    const Image& gt = dataset.frames[dataset.probe_frame].images[cam];
    const Image rendered = fb.premultiplied_rgba();
    if (gt.channels() == 4) {
        return psnr(rendered, gt);
    }
    return psnr(rendered.channel(3), gt.channel(gt.channels() - 1));
}

}  // namespace

FitResult fit(const FitDataset& dataset, const Asset& asset, const FitConfig& config, const FitProgress& progress) {
    dataset.validate();
    config.validate();
    asset.validate();
    for (const FitFrame& frame : dataset.frames) {
        frame.pose.validate(asset.skeleton.size());
        for (const Image& image : frame.images) {
            if (image.channels() != asset.flut.channels() + 1) {
                throw ContractError(fmt::format("images need {} channels (color + alpha), got {}",
                                                asset.flut.channels() + 1, image.channels()));
            }
        }
    }

    const double cell = asset.voxels.grid.cell_size();
    FitResult result;
    result.flut = config.warm_start ? asset.flut
                                    : initialize_flut(asset.voxels.size(), asset.flut.sh_degree(),
                                                      asset.flut.channels(), cell, config.seed);
    Flut& flut = result.flut;

    AdamConfig adam = config.adam;
    adam.density_learning_rate =
        config.density_learning_rate > 0.0 ? config.density_learning_rate : adam.learning_rate / cell;
    SparseAdam optimizer(flut.size(), flut.stride(), adam);
    GradBuffer grad(flut.size(), flut.stride());

    std::vector<FrameCache> caches(dataset.frames.size());
    for (std::size_t f = 0; f < dataset.frames.size(); ++f) {
        caches[f].warp = warp_voxels(asset.voxels, asset.weights, asset.skeleton, dataset.frames[f].pose);
        if (caches[f].warp.collision_groups.empty()) {
            caches[f].fixed = resolve_volume(asset, caches[f], flut);
        }
    }

    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<std::size_t> pick_frame(0, dataset.frames.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_camera(0, dataset.train_cameras.size() - 1);
    const int channels = flut.channels();
    const double scale = 1.0 / static_cast<double>(config.rays_per_batch);

    std::vector<std::size_t> ray_camera(config.rays_per_batch);
    std::vector<int> ray_x(config.rays_per_batch), ray_y(config.rays_per_batch);
    std::vector<TracedRay> traced(config.rays_per_batch);
    std::vector<RaySample> predictions(config.rays_per_batch), references(config.rays_per_batch);
    std::vector<RayResidual> residuals(config.rays_per_batch);

    for (std::size_t it = 0; it < config.iterations; ++it) {
        const auto start = Clock::now();
        const std::size_t frame = config.pose_sampling == PoseSampling::kUniform ? pick_frame(rng)
                                                                                  : it % dataset.frames.size();
        PosedVolume scratch;
        const PosedVolume& volume = posed_volume(asset, caches[frame], flut, scratch);

        for (std::size_t r = 0; r < config.rays_per_batch; ++r) {
            const std::size_t cam = dataset.train_cameras[pick_camera(rng)];
            ray_camera[r] = cam;
            ray_x[r] = std::uniform_int_distribution<int>(0, dataset.cameras[cam].width - 1)(rng);
            ray_y[r] = std::uniform_int_distribution<int>(0, dataset.cameras[cam].height - 1)(rng);
        }
        const FitFrame& data = dataset.frames[frame];
        tbb::parallel_for(tbb::blocked_range<std::size_t>(0, config.rays_per_batch, 16),
                          [&](const tbb::blocked_range<std::size_t>& range) {
                              for (std::size_t r = range.begin(); r != range.end(); ++r) {
                                  const Camera& camera = dataset.cameras[ray_camera[r]];
                                  const Ray ray = ray_from_pixel(camera, Vec2(ray_x[r], ray_y[r]));
                                  traced[r] = trace_ray(volume.octree, flut, ray, volume.rotations);
                                  predictions[r] = traced[r].prediction;
                                  references[r] =
                                      reference_sample(data.images[ray_camera[r]], ray_x[r], ray_y[r], channels);
                                  residuals[r] = l1_residual(predictions[r], references[r], channels, scale,
                                                             config.l1_deadzone);
                              }
                          });
        for (std::size_t r = 0; r < config.rays_per_batch; ++r) {
            bool finite = std::isfinite(predictions[r].alpha);
            for (int c = 0; c < channels; ++c) {
                finite = finite && std::isfinite(predictions[r].color[c]);
            }
            if (!finite) {
                throw DivergedError(it, r);
            }
        }

        LossReport report;
        report.iteration = it;
        report.l_rgba = loss_rgba(predictions, references, channels);
        report.l_vrt = loss_vrt(volume.resolved.pairs, flut);
        report.total = report.l_rgba + config.lambda_vrt * report.l_vrt;
        report.collision_pairs = volume.resolved.pairs.size();
        if (!std::isfinite(report.total)) {
            throw DivergedError(it, 0);
        }

        backward(traced, residuals, flut, grad, config.reduction);
        add_vrt_gradient(volume.resolved.pairs, flut, config.lambda_vrt, grad);
        optimizer.step(flut.data(), grad);
        grad.clear();

        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        report.rays_per_second = seconds > 0.0 ? static_cast<double>(config.rays_per_batch) / seconds : 0.0;
        if ((it + 1) % config.probe_interval == 0 || it + 1 == config.iterations) {
            report.probe_psnr = probe_psnr(dataset, asset, caches[dataset.probe_frame], flut);
        }
        if (progress) {
            progress(report);
        }
        result.history.push_back(report);
    }
    return result;
}

}  // namespace nvo
