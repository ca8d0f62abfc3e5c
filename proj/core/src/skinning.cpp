// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/skinning.hpp"

#include "nvo/error.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace nvo {

SkinWeights::SkinWeights(const std::vector<std::vector<JointWeight>>& per_voxel) {
    offsets_.reserve(per_voxel.size() + 1);
    for (const auto& list : per_voxel) {
        entries_.insert(entries_.end(), list.begin(), list.end());
        offsets_.push_back(entries_.size());
    }
}

SkinWeights SkinWeights::rigid(std::size_t voxel_count, std::uint16_t joint) {
    SkinWeights w;
    w.entries_.assign(voxel_count, JointWeight{joint, 1.0f});
    w.offsets_.resize(voxel_count + 1);
    for (std::size_t i = 0; i <= voxel_count; ++i) {
        w.offsets_[i] = i;
    }
    return w;
}

std::uint16_t SkinWeights::dominant_joint(std::size_t voxel) const {
    const auto list = of(voxel);
    std::uint16_t best = 0;
    float best_weight = -1.0f;
    for (const JointWeight& jw : list) {
        if (jw.weight > best_weight || (jw.weight == best_weight && jw.joint < best)) {
            best = jw.joint;
            best_weight = jw.weight;
        }
    }
    return best;
}

namespace {

void validate_weight_list(std::span<const JointWeight> list, std::size_t joint_count, std::size_t index,
                          const char* what) {
    double sum = 0.0;
    for (const JointWeight& jw : list) {
        if (jw.joint >= joint_count) {
            throw ContractError(fmt::format("{} {} references joint {} of {}", what, index, jw.joint, joint_count));
        }
        if (!(jw.weight >= 0.0f) || !std::isfinite(jw.weight)) {
            throw ContractError(fmt::format("{} {} has a negative or non-finite weight", what, index));
        }
        sum += jw.weight;
    }
    if (std::abs(sum - 1.0) > 1e-5) {
        throw ContractError(fmt::format("{} {} weights sum to {} instead of 1", what, index, sum));
    }
}

// Uniform bucket grid over mesh vertices for k-nearest queries.
class VertexGrid {
public:
    explicit VertexGrid(const std::vector<Vec3>& vertices) : vertices_(vertices) {
        lo_ = vertices.front();
        Vec3 hi = lo_;
        for (const Vec3& v : vertices) {
            lo_ = lo_.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        const Vec3 ext = (hi - lo_).cwiseMax(1e-9);
        // About four vertices per occupied bucket on a surface-like set.
        const double target = std::max(1.0, static_cast<double>(vertices.size()) / 4.0);
        cell_ = std::cbrt(ext.prod() / target);
        cell_ = std::max(cell_, ext.maxCoeff() / 256.0);
        for (int a = 0; a < 3; ++a) {
            dims_[a] = std::max(1, static_cast<int>(std::ceil(ext[a] / cell_)));
        }
        const std::size_t buckets = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
        std::vector<std::size_t> counts(buckets + 1, 0);
        std::vector<std::size_t> bucket_of(vertices.size());
        for (std::size_t v = 0; v < vertices.size(); ++v) {
            const auto c = clamp_cell(vertices[v]);
            bucket_of[v] = flat(c[0], c[1], c[2]);
            ++counts[bucket_of[v] + 1];
        }
        for (std::size_t b = 0; b < buckets; ++b) {
            counts[b + 1] += counts[b];
        }
        start_ = counts;
        items_.resize(vertices.size());
        for (std::size_t v = 0; v < vertices.size(); ++v) {
            items_[counts[bucket_of[v]]++] = static_cast<std::uint32_t>(v);
        }
    }

    /// The m nearest vertices as (distance, index), sorted by distance then index.
    void nearest(const Vec3& q, std::size_t m, std::vector<std::pair<double, std::uint32_t>>& out) const {
        out.clear();
        const auto worse = [](const std::pair<double, std::uint32_t>& a, const std::pair<double, std::uint32_t>& b) {
            return a < b;
        };
        std::array<int, 3> qc;
        for (int a = 0; a < 3; ++a) {
            qc[a] = static_cast<int>(std::floor((q[a] - lo_[a]) / cell_));
        }
        int max_ring = 0;
        for (int a = 0; a < 3; ++a) {
            max_ring = std::max({max_ring, std::abs(qc[a]), std::abs(dims_[a] - 1 - qc[a])});
        }
        for (int ring = 0; ring <= max_ring; ++ring) {
            for (int z = qc[2] - ring; z <= qc[2] + ring; ++z) {
                if (z < 0 || z >= dims_[2]) continue;
                for (int y = qc[1] - ring; y <= qc[1] + ring; ++y) {
                    if (y < 0 || y >= dims_[1]) continue;
                    const bool yz_edge = std::abs(z - qc[2]) == ring || std::abs(y - qc[1]) == ring;
                    for (int x = qc[0] - ring; x <= qc[0] + ring; ++x) {
                        if (x < 0 || x >= dims_[0]) continue;
                        if (!yz_edge && std::abs(x - qc[0]) != ring) continue;
                        const std::size_t b = flat(x, y, z);
                        for (std::size_t it = start_[b]; it < start_[b + 1]; ++it) {
                            const std::uint32_t v = items_[it];
                            const std::pair<double, std::uint32_t> cand{(vertices_[v] - q).norm(), v};
                            if (out.size() < m) {
                                out.push_back(cand);
                                std::push_heap(out.begin(), out.end(), worse);
                            } else if (worse(cand, out.front())) {
                                std::pop_heap(out.begin(), out.end(), worse);
                                out.back() = cand;
                                std::push_heap(out.begin(), out.end(), worse);
                            }
                        }
                    }
                }
            }
            // Every point in ring + 1 is at least ring * cell away.
            if (out.size() == m && out.front().first <= ring * cell_) {
                break;
            }
        }
        std::sort_heap(out.begin(), out.end(), worse);
    }

private:
    std::array<int, 3> clamp_cell(const Vec3& p) const {
        std::array<int, 3> c;
        for (int a = 0; a < 3; ++a) {
            c[a] = std::clamp(static_cast<int>(std::floor((p[a] - lo_[a]) / cell_)), 0, dims_[a] - 1);
        }
        return c;
    }
    std::size_t flat(int x, int y, int z) const {
        return (static_cast<std::size_t>(z) * dims_[1] + y) * dims_[0] + x;
    }

    const std::vector<Vec3>& vertices_;
    Vec3 lo_;
    double cell_ = 1.0;
    std::array<int, 3> dims_{1, 1, 1};
    std::vector<std::size_t> start_;
    std::vector<std::uint32_t> items_;
};

}  // namespace

void SkinWeights::validate(std::size_t joint_count) const {
    for (std::size_t v = 0; v < size(); ++v) {
        validate_weight_list(of(v), joint_count, v, "voxel");
    }
}

void SkinnedMesh::validate(std::size_t joint_count) const {
    if (vertices.empty()) {
        throw ContractError("skinned mesh has no vertices");
    }
    if (weights.size() != vertices.size()) {
        throw ContractError("skinned mesh needs one weight list per vertex");
    }
    for (std::size_t v = 0; v < weights.size(); ++v) {
        validate_weight_list(weights[v], joint_count, v, "vertex");
    }
}

BakeResult bake_skinning_weights(const VoxelSet& voxels, const SkinnedMesh& mesh, const BakeOptions& options) {
    if (options.neighbors < 1) {
        throw ContractError("bake needs at least one neighbor");
    }
    if (mesh.vertices.empty() || mesh.weights.size() != mesh.vertices.size()) {
        throw ContractError("skinned mesh must be non-empty with one weight list per vertex");
    }
    BakeResult result;
    std::size_t m = static_cast<std::size_t>(options.neighbors);
    if (m > mesh.vertices.size()) {
        result.warnings.push_back(fmt::format("requested {} neighbors but the mesh has {} vertices; clamping",
                                              options.neighbors, mesh.vertices.size()));
        m = mesh.vertices.size();
    }
    result.neighbors_used = static_cast<int>(m);

    const VertexGrid grid(mesh.vertices);
    const double sign = options.sign == BlendSign::kNearer ? -1.0 : 1.0;
    std::vector<std::vector<JointWeight>> per_voxel(voxels.size());
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, voxels.size(), 256), [&](const tbb::blocked_range<std::size_t>& r) {
        std::vector<std::pair<double, std::uint32_t>> near;
        std::vector<double> blend;
        for (std::size_t i = r.begin(); i != r.end(); ++i) {
            grid.nearest(voxels.center(i), m, near);
            const double d_min = near.front().first;
            blend.assign(near.size(), 0.0);
            double norm = 0.0;
            for (std::size_t n = 0; n < near.size(); ++n) {
                blend[n] = std::exp(sign * (near[n].first - d_min));
                norm += blend[n];
            }
            std::map<std::uint16_t, double> joint_weights;
            for (std::size_t n = 0; n < near.size(); ++n) {
                for (const JointWeight& jw : mesh.weights[near[n].second]) {
                    joint_weights[jw.joint] += blend[n] / norm * jw.weight;
                }
            }
            double total = 0.0;
            for (const auto& [joint, w] : joint_weights) {
                total += w;
            }
            auto& out = per_voxel[i];
            for (const auto& [joint, w] : joint_weights) {
                if (w > 0.0) {
                    out.push_back({joint, static_cast<float>(w / total)});
                }
            }
        }
    });
    result.weights = SkinWeights(per_voxel);
    return result;
}

}  // namespace nvo
