// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/skeleton.hpp"

#include "nvo/error.hpp"

#include <fmt/format.h>

namespace nvo {

Skeleton::Skeleton(std::vector<Joint> joints) : joints_(std::move(joints)) {
    if (joints_.empty()) {
        throw ContractError("skeleton needs at least one joint");
    }
    if (joints_.size() > 0xffff) {
        throw ContractError("skeleton has more than 65535 joints");
    }
    if (joints_[0].parent != -1) {
        throw ContractError("joint 0 must be the root");
    }
    canonical_.reserve(joints_.size());
    canonical_.push_back(joints_[0].bind_local);
    for (std::size_t j = 1; j < joints_.size(); ++j) {
        const int parent = joints_[j].parent;
        if (parent < 0 || static_cast<std::size_t>(parent) >= j) {
            throw ContractError(fmt::format("joint {} ('{}') must have a parent with a smaller index", j, joints_[j].name));
        }
        canonical_.push_back(canonical_[parent] * joints_[j].bind_local);
    }
}

Skeleton Skeleton::single_joint() { return Skeleton({Joint{"root", -1, RigidTransform::identity()}}); }

Pose Pose::canonical(std::size_t joint_count) {
    Pose pose;
    pose.joint_rotations.assign(joint_count, Vec3::Zero());
    return pose;
}

void Pose::validate(std::size_t joint_count) const {
    if (joint_rotations.size() != joint_count) {
        throw ContractError(
            fmt::format("pose has {} joint rotations, skeleton has {} joints", joint_rotations.size(), joint_count));
    }
    for (const Vec3& r : joint_rotations) {
        if (!r.allFinite()) {
            throw ContractError("pose contains non-finite joint rotations");
        }
    }
    if (!root_rotation.allFinite() || !root_translation.allFinite()) {
        throw ContractError("pose contains non-finite global transform");
    }
}

Pose Pose::wrapped() const {
    Pose out = *this;
    for (Vec3& r : out.joint_rotations) {
        r = r.unaryExpr([](double a) { return wrap_angle(a); });
    }
    out.root_rotation = root_rotation.unaryExpr([](double a) { return wrap_angle(a); });
    return out;
}

std::vector<RigidTransform> forward_kinematics(const Skeleton& skeleton, const Pose& pose) {
    pose.validate(skeleton.size());
    std::vector<RigidTransform> local_chain(skeleton.size());
    for (std::size_t j = 0; j < skeleton.size(); ++j) {
        const Joint& joint = skeleton.joint(j);
        const RigidTransform posed_local = joint.bind_local * RigidTransform::from_rotation(euler_xyz(pose.joint_rotations[j]));
        local_chain[j] = joint.parent < 0 ? posed_local : local_chain[joint.parent] * posed_local;
    }
    const RigidTransform global = pose.global_transform();
    std::vector<RigidTransform> live(skeleton.size());
    for (std::size_t j = 0; j < skeleton.size(); ++j) {
        live[j] = global * local_chain[j];
    }
    return live;
}

}  // namespace nvo
