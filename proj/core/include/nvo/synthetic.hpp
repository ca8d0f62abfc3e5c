// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Analytic test scenes and the dense reference marcher that renders their
// ground truth. The marcher samples the field at fixed steps and shares
// nothing with the segment integrator in the renderer.

#include "nvo/asset.hpp"
#include "nvo/camera.hpp"
#include "nvo/fitter.hpp"
#include "nvo/image.hpp"
#include "nvo/scene_io.hpp"
#include "nvo/skeleton.hpp"
#include "nvo/skinning.hpp"
#include "nvo/voxel_set.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <limits>
#include <vector>

namespace nvo {

/// Density (inverse world units) and straight color over a box; both are
/// zero outside it.
struct AnalyticField {
    Aabb bounds;
    std::function<double(const Vec3&)> density;
    /// Color at a point seen along a unit direction.
    std::function<Vec3(const Vec3&, const Vec3&)> color;
    /// Density is negligible farther than this from the box center; rays
    /// are clipped to that ball as well.
    double support_radius = std::numeric_limits<double>::infinity();
};

struct MarchSample {
    std::array<double, 3> color{};
    double alpha = 0.0;
};

/// Midpoint rule with a fixed world step from the box entry to its exit.
MarchSample march_ray(const AnalyticField& field, const Ray& ray, double step);

/// Premultiplied RGBA ground truth, one marched ray per pixel center.
Image march_image(const AnalyticField& field, const Camera& camera, double step);

struct FuzzySphereParams {
    double core_radius = 0.5;
    double falloff = 0.1;
    double core_density = 20.0;
};

/// Constant-density core with a Gaussian shell and a smooth positional color.
AnalyticField fuzzy_sphere_field(const Aabb& bounds, const FuzzySphereParams& params = {});

/// Two bones along x meeting at the origin, each a capsule of radius 0.25
/// with hashed value-noise fur. The field of a posed rig is the maximum of
/// the rigidly transformed bone fields.
Skeleton capsule_skeleton();
AnalyticField capsule_field(const Aabb& bounds, const Skeleton& skeleton, const Pose& pose);
/// Capsule surface samples with weights ramping between the bones near the joint.
SkinnedMesh capsule_mesh(std::size_t samples, std::uint64_t seed);
/// Canonical (straight) and folded pose, bending the second bone by `bend_rad` about z.
std::vector<Pose> capsule_poses(double bend_rad);

/// Cameras around the origin on a ring of `count` azimuths at a fixed
/// elevation, looking at the origin (z-up world).
std::vector<Camera> ring_cameras(std::size_t count, double elevation_rad, double azimuth_offset_rad,
                                 double radius, double vertical_fov_rad, int size);

enum class SyntheticKind { kFuzzySphere, kTwoBoneCapsule };

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::kFuzzySphere;
    std::uint32_t resolution = 64;
    int image_size = 128;
    std::size_t train_views = 20;
    std::size_t probe_views = 4;
    double camera_radius = 3.0;
    double vertical_fov_rad = 0.785398163397448;
    /// Marcher step as a fraction of the cell size.
    double step_fraction = 1.0 / 64.0;
    /// Fold angle of the capsule's second pose.
    double bend_rad = 2.0943951023931957;
    std::uint64_t seed = 7;
};

struct SyntheticScene {
    VoxelGrid grid;
    Skeleton skeleton;
    SkinnedMesh mesh;
    FitDataset dataset;
};

/// Cameras, poses and marched ground truth. Train cameras come first,
/// then the probe cameras.
SyntheticScene make_synthetic_scene(const SyntheticSpec& spec);

/// Writes a manifest, straight-alpha PNGs, the skeleton and the skinning
/// mesh under `directory`; returns the manifest path.
std::filesystem::path save_synthetic_scene(const SyntheticScene& scene, const std::filesystem::path& directory,
                                           int sh_degree = 2);

/// Throughput workload: a solid ball of exactly `voxels` cells (nearest to
/// the grid center first, ties in Morton order) on the smallest power-of-two
/// grid that keeps it within 0.35 of the width, rigged to the two-bone
/// skeleton with a linear blend across the joint, random degree-2 RGB
/// features and an optical depth of about 0.5 per cell.
Asset make_benchmark_asset(std::size_t voxels, std::uint64_t seed);

/// Pose used with the benchmark asset: the second bone bent by 0.5 rad.
Pose benchmark_pose();

}  // namespace nvo
