// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/geometry.hpp"
#include "nvo/voxel_set.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nvo {

struct JointWeight {
    std::uint16_t joint = 0;
    float weight = 0.0f;

    friend bool operator==(const JointWeight&, const JointWeight&) = default;
};

/// Sparse per-voxel skinning weights (CSR layout).
class SkinWeights {
public:
    SkinWeights() = default;
    explicit SkinWeights(const std::vector<std::vector<JointWeight>>& per_voxel);

    /// Every voxel bound rigidly to `joint`.
    static SkinWeights rigid(std::size_t voxel_count, std::uint16_t joint = 0);

    std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::span<const JointWeight> of(std::size_t voxel) const {
        return {entries_.data() + offsets_[voxel], offsets_[voxel + 1] - offsets_[voxel]};
    }
    /// Joint with the largest weight; ties go to the lowest joint index.
    std::uint16_t dominant_joint(std::size_t voxel) const;

    /// Throws ContractError on negative weights, sums off 1 by more than
    /// 1e-5, or joint indices >= joint_count.
    void validate(std::size_t joint_count) const;

    friend bool operator==(const SkinWeights&, const SkinWeights&) = default;

private:
    std::vector<std::size_t> offsets_{0};
    std::vector<JointWeight> entries_;
};

/// Canonical-pose mesh vertices with their skinning weights.
struct SkinnedMesh {
    std::vector<Vec3> vertices;
    std::vector<std::vector<JointWeight>> weights;

    void validate(std::size_t joint_count) const;
};

/// exp(-delta) favours the nearer vertices; exp(+delta) reproduces the
/// printed form of the blend, kept for comparison runs.
enum class BlendSign { kNearer, kFarther };

struct BakeOptions {
    int neighbors = 4;
    BlendSign sign = BlendSign::kNearer;
};

struct BakeResult {
    SkinWeights weights;
    int neighbors_used = 0;
    std::vector<std::string> warnings;
};

/// Per voxel: take the m nearest vertices (distances d_j), blend their
/// weights with softmax(-(d_j - min d)) and renormalize.
BakeResult bake_skinning_weights(const VoxelSet& voxels, const SkinnedMesh& mesh,
                                 const BakeOptions& options = {});

}  // namespace nvo
