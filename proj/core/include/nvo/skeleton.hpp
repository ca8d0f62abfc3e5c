// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/geometry.hpp"

#include <string>
#include <vector>

namespace nvo {

struct Joint {
    std::string name;
    /// Index of the parent joint, -1 for the root.
    int parent = -1;
    /// Transform from this joint's frame to its parent's frame in the bind pose.
    RigidTransform bind_local;
};

/// Joint hierarchy in topological order: joint 0 is the only root and every
/// parent index is smaller than its child's.
class Skeleton {
public:
    Skeleton() = default;
    /// Throws ContractError when the hierarchy is not a topologically ordered tree.
    explicit Skeleton(std::vector<Joint> joints);

    /// One root joint at the origin. Used for rigid (unrigged) assets.
    static Skeleton single_joint();

    std::size_t size() const { return joints_.size(); }
    const std::vector<Joint>& joints() const { return joints_; }
    const Joint& joint(std::size_t j) const { return joints_[j]; }

    /// Bind-pose global transforms M^c_j.
    const std::vector<RigidTransform>& canonical_globals() const { return canonical_; }

private:
    std::vector<Joint> joints_;
    std::vector<RigidTransform> canonical_;
};

/// Articulated pose: per-joint local Euler XYZ rotations applied after the
/// bind transform, plus a global rotation (Euler XYZ) and translation.
struct Pose {
    std::vector<Vec3> joint_rotations;
    Vec3 root_rotation = Vec3::Zero();
    Vec3 root_translation = Vec3::Zero();

    static Pose canonical(std::size_t joint_count);

    /// Throws ContractError on a joint-count mismatch or non-finite values.
    void validate(std::size_t joint_count) const;
    /// Returns a copy with every angle wrapped into (-pi, pi].
    Pose wrapped() const;

    RigidTransform global_transform() const {
        return RigidTransform(euler_xyz(root_rotation), root_translation);
    }
};

/// Live global transforms M^t_j = G * chain(bind_local * rot(r)), root first.
std::vector<RigidTransform> forward_kinematics(const Skeleton& skeleton, const Pose& pose);

}  // namespace nvo
