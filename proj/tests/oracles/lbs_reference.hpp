// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Direct 4x4 evaluation of linear blend skinning and forward kinematics
// from Euler angles, using Eigen's Affine3d only.

#include <Eigen/Geometry>

#include <vector>

namespace oracle {

struct RefJoint {
    int parent;
    Eigen::Affine3d bind_local;
};

inline Eigen::Matrix3d euler(const Eigen::Vector3d& a) {
    return (Eigen::AngleAxisd(a.x(), Eigen::Vector3d::UnitX()) * Eigen::AngleAxisd(a.y(), Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(a.z(), Eigen::Vector3d::UnitZ()))
        .toRotationMatrix();
}

/// Global matrices; `rotations` empty means the bind pose.
inline std::vector<Eigen::Matrix4d> globals(const std::vector<RefJoint>& joints,
                                            const std::vector<Eigen::Vector3d>& rotations,
                                            const Eigen::Vector3d& root_rotation, const Eigen::Vector3d& root_translation) {
    std::vector<Eigen::Matrix4d> chain(joints.size());
    for (std::size_t j = 0; j < joints.size(); ++j) {
        Eigen::Matrix4d r = Eigen::Matrix4d::Identity();
        if (!rotations.empty()) r.topLeftCorner<3, 3>() = euler(rotations[j]);
        const Eigen::Matrix4d local = joints[j].bind_local.matrix() * r;
        chain[j] = joints[j].parent < 0 ? local : Eigen::Matrix4d(chain[joints[j].parent] * local);
    }
    Eigen::Matrix4d g = Eigen::Matrix4d::Identity();
    g.topLeftCorner<3, 3>() = euler(root_rotation);
    g.topRightCorner<3, 1>() = root_translation;
    for (auto& m : chain) m = g * m;
    return chain;
}

inline Eigen::Vector3d skin_point(const Eigen::Vector3d& p, const std::vector<std::pair<int, double>>& weights,
                                  const std::vector<Eigen::Matrix4d>& live, const std::vector<Eigen::Matrix4d>& bind) {
    Eigen::Vector4d acc = Eigen::Vector4d::Zero();
    for (const auto& [j, w] : weights) acc += w * (live[j] * bind[j].inverse() * p.homogeneous());
    return acc.head<3>();
}

}  // namespace oracle
