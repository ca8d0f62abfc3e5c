// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <numbers>

namespace nvo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

/// Axis-aligned box in world units.
struct Aabb {
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();

    Vec3 extent() const { return hi - lo; }
    Vec3 center() const { return 0.5 * (lo + hi); }
    bool contains(const Vec3& p) const {
        return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
    }
};

/// Rotation + translation acting as x -> R x + t. The quaternion is kept at
/// unit norm; matrices are derived views.
class RigidTransform {
public:
    RigidTransform() : rotation_(Quat::Identity()), translation_(Vec3::Zero()) {}
    RigidTransform(const Quat& rotation, const Vec3& translation);

    static RigidTransform identity() { return {}; }
    static RigidTransform from_translation(const Vec3& t) { return {Quat::Identity(), t}; }
    static RigidTransform from_rotation(const Quat& q) { return {q, Vec3::Zero()}; }

    const Quat& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }

    Vec3 apply_point(const Vec3& p) const { return rotation_ * p + translation_; }
    Vec3 apply_vector(const Vec3& v) const { return rotation_ * v; }

    RigidTransform inverse() const;
    Mat4 matrix() const;

    /// (a * b)(x) = a(b(x)).
    friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b);

private:
    Quat rotation_;
    Vec3 translation_;
};

/// Intrinsic X-then-Y-then-Z Euler angles (radians): R = Rx(a.x) Ry(a.y) Rz(a.z).
Quat euler_xyz(const Vec3& angles);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

}  // namespace nvo
