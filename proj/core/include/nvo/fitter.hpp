// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/asset.hpp"
#include "nvo/camera.hpp"
#include "nvo/image.hpp"
#include "nvo/loss.hpp"
#include "nvo/octree.hpp"
#include "nvo/optimizer.hpp"
#include "nvo/ray_integral.hpp"
#include "nvo/skeleton.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace nvo {

/// Multi-view images of one pose. Images are premultiplied RGBA, one per camera.
struct FitFrame {
    Pose pose;
    std::vector<Image> images;
};

struct FitDataset {
    std::vector<Camera> cameras;
    std::vector<FitFrame> frames;
    /// Cameras rays are sampled from.
    std::vector<std::size_t> train_cameras;
    /// Held-out cameras for the PSNR probe (first one is used).
    std::vector<std::size_t> probe_cameras;
    std::size_t probe_frame = 0;

    /// Throws ContractError on inconsistent image counts or sizes.
    void validate() const;
};

enum class PoseSampling { kUniform, kRoundRobin };

/// kDeterministic merges per-ray gradients in ray order, independent of the
/// thread count. kFast merges per-thread buffers in scheduling order and may
/// differ in the last bits between runs.
enum class ReductionMode { kDeterministic, kFast };

struct FitConfig {
    std::size_t iterations = 2000;
    std::size_t rays_per_batch = 4096;
    AdamConfig adam;
    /// Density learning rate; <= 0 selects learning_rate / cell size.
    double density_learning_rate = 0.0;
    double lambda_vrt = 0.01;
    PoseSampling pose_sampling = PoseSampling::kUniform;
    std::uint64_t seed = 1;
    ReductionMode reduction = ReductionMode::kDeterministic;
    /// Probe PSNR is recomputed every probe_interval iterations (and at the end).
    std::size_t probe_interval = 50;
    /// Residuals smaller than this give no L1 gradient (f32 storage noise).
    double l1_deadzone = 1e-6;
    /// Keep the asset's FLUT as the starting point instead of re-initializing.
    bool warm_start = false;

    void validate() const;
};

struct LossReport {
    std::size_t iteration = 0;
    double l_rgba = 0.0;
    double l_vrt = 0.0;
    double total = 0.0;
    double probe_psnr = std::numeric_limits<double>::quiet_NaN();
    double rays_per_second = 0.0;
    std::size_t collision_pairs = 0;
};

using FitProgress = std::function<void(const LossReport&)>;

struct FitResult {
    Flut flut;
    std::vector<LossReport> history;
};

/// Random FLUT start: coefficients ~ U(-0.01, 0.01) except band 0, which
/// decodes to 0.5 in every channel; density 0.1 / cell_size.
Flut initialize_flut(std::size_t entries, int sh_degree, int channels, double cell_size, std::uint64_t seed);

/// A ray gathered without early stop, ready for the backward pass.
struct TracedRay {
    std::vector<RayHit<double>> hits;
    RaySample prediction;
};

TracedRay trace_ray(const VoxelOctree& octree, const Flut& flut, const Ray& ray, std::span<const Quat> rotations);

/// Upstream gradient of the per-ray loss.
struct RayResidual {
    std::array<double, kMaxChannels> d_color{};
    double d_alpha = 0.0;
};

/// Gradient of scale * (sum_c |pred_c - gt_c| + |pred_a - gt_a|), with the
/// sign zeroed inside the dead zone.
RayResidual l1_residual(const RaySample& pred, const RaySample& gt, int channels, double scale, double deadzone);

/// Accumulates d(loss)/d(FLUT) for the traced rays into `grad`.
void backward(std::span<const TracedRay> rays, std::span<const RayResidual> residuals, const Flut& flut,
              GradBuffer& grad, ReductionMode mode = ReductionMode::kDeterministic);

/// Adds lambda * d(loss_vrt)/d(FLUT).
void add_vrt_gradient(std::span<const CollisionPair> pairs, const Flut& flut, double lambda, GradBuffer& grad);

/// Optimizes the asset's FLUT against the dataset. Returns the trained table
/// and one report per iteration. Throws DivergedError on a non-finite loss.
FitResult fit(const FitDataset& dataset, const Asset& asset, const FitConfig& config,
              const FitProgress& progress = {});

}  // namespace nvo
