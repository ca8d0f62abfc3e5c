// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/camera.hpp"

#include "nvo/error.hpp"

#include <cmath>

namespace nvo {

Ray make_ray(const Vec3& origin, const Vec3& direction) {
    const double norm = direction.norm();
    if (!(norm > 0.0) || !std::isfinite(norm) || !origin.allFinite()) {
        throw ContractError("ray needs a finite origin and a non-zero direction");
    }
    return {origin, direction / norm};
}

void Camera::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw ContractError("camera focal lengths must be positive");
    }
    if (width <= 0 || height <= 0) {
        throw ContractError("camera image size must be positive");
    }
    if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
        throw ContractError("camera principal point must lie inside the image");
    }
}

Ray ray_from_pixel(const Camera& camera, const Vec2& px) {
    const Vec3 local((px.x() + 0.5 - camera.cx) / camera.fx, (px.y() + 0.5 - camera.cy) / camera.fy, 1.0);
    const RigidTransform to_world = camera.camera_to_world();
    return {to_world.translation(), to_world.apply_vector(local).normalized()};
}

std::optional<Vec2> project(const Camera& camera, const Vec3& world) {
    const Vec3 local = camera.world_to_camera.apply_point(world);
    if (!(local.z() > 0.0)) {
        return std::nullopt;
    }
    return Vec2(camera.fx * local.x() / local.z() + camera.cx - 0.5,
                camera.fy * local.y() / local.z() + camera.cy - 0.5);
}

Camera look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up, double vertical_fov_rad, int width,
                      int height) {
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = forward.cross(up);
    if (right.squaredNorm() < 1e-20) {
        // Looking along `up`; any perpendicular works.
        right = forward.unitOrthogonal();
    }
    right.normalize();
    const Vec3 down = forward.cross(right);
    Mat3 camera_to_world;
    camera_to_world.col(0) = right;
    camera_to_world.col(1) = down;
    camera_to_world.col(2) = forward;
    const RigidTransform to_world(Quat(camera_to_world), eye);

    Camera camera;
    camera.width = width;
    camera.height = height;
    camera.fy = 0.5 * height / std::tan(0.5 * vertical_fov_rad);
    camera.fx = camera.fy;
    camera.cx = 0.5 * width;
    camera.cy = 0.5 * height;
    camera.world_to_camera = to_world.inverse();
    camera.validate();
    return camera;
}

Camera orbit_camera(double azimuth_rad, double elevation_rad, double radius, const Vec3& target,
                    double vertical_fov_rad, int width, int height) {
    const Vec3 offset(std::cos(elevation_rad) * std::cos(azimuth_rad), std::cos(elevation_rad) * std::sin(azimuth_rad),
                      std::sin(elevation_rad));
    return look_at_camera(target + radius * offset, target, Vec3::UnitZ(), vertical_fov_rad, width, height);
}

}  // namespace nvo
