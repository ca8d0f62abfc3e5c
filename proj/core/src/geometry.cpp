// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/geometry.hpp"

#include "nvo/error.hpp"

#include <cmath>

namespace nvo {

RigidTransform::RigidTransform(const Quat& rotation, const Vec3& translation) : translation_(translation) {
    const double norm = rotation.norm();
    if (!(norm > 0.0) || !std::isfinite(norm) || !translation.allFinite()) {
        throw ContractError("rigid transform needs a finite non-zero quaternion and finite translation");
    }
    // Already-unit quaternions are kept bit-for-bit so re-wrapping is idempotent.
    rotation_ = std::abs(norm - 1.0) <= 1e-14 ? rotation : Quat(rotation.coeffs() / norm);
}

RigidTransform RigidTransform::inverse() const {
    const Quat inv = rotation_.conjugate();
    return RigidTransform(inv, -(inv * translation_));
}

Mat4 RigidTransform::matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation_.toRotationMatrix();
    m.topRightCorner<3, 1>() = translation_;
    return m;
}

RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    return RigidTransform(a.rotation_ * b.rotation_, a.rotation_ * b.translation_ + a.translation_);
}

Quat euler_xyz(const Vec3& angles) {
    return Quat(Eigen::AngleAxisd(angles.x(), Vec3::UnitX())) * Quat(Eigen::AngleAxisd(angles.y(), Vec3::UnitY())) *
           Quat(Eigen::AngleAxisd(angles.z(), Vec3::UnitZ()));
}

double wrap_angle(double radians) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double wrapped = std::remainder(radians, two_pi);
    if (wrapped <= -std::numbers::pi) {
        wrapped += two_pi;
    }
    return wrapped;
}

}  // namespace nvo
