// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/geometry.hpp"

#include <optional>

namespace nvo {

/// Half-line o + t d with |d| = 1.
struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();
};

/// Builds a ray, normalizing the direction. Throws ContractError on a zero
/// or non-finite direction.
Ray make_ray(const Vec3& origin, const Vec3& direction);

/// Pinhole camera. Camera space follows the x-right, y-down, z-forward
/// convention; `world_to_camera` maps world points into that frame.
struct Camera {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.5;
    double cy = 0.5;
    int width = 1;
    int height = 1;
    RigidTransform world_to_camera;

    /// Throws ContractError unless fx, fy > 0 and the principal point lies
    /// inside the image.
    void validate() const;

    RigidTransform camera_to_world() const { return world_to_camera.inverse(); }
    Vec3 center() const { return camera_to_world().translation(); }
};

/// Ray through pixel `px`. Pixel (i, j) covers [i, i+1) x [j, j+1); the ray
/// passes through its center (px + 0.5).
Ray ray_from_pixel(const Camera& camera, const Vec2& px);

/// Inverse of ray_from_pixel: the pixel coordinate (same convention, so the
/// center of pixel (i, j) maps to (i, j)) or nullopt behind the camera.
std::optional<Vec2> project(const Camera& camera, const Vec3& world);

/// Camera at `eye` looking at `target`; `up` fixes the roll.
Camera look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up,
                      double vertical_fov_rad, int width, int height);

/// Orbit parameterization around `target` in a z-up world. Azimuth is
/// measured from +x towards +y, elevation from the xy-plane.
Camera orbit_camera(double azimuth_rad, double elevation_rad, double radius,
                    const Vec3& target, double vertical_fov_rad, int width, int height);

}  // namespace nvo
