// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Random scene builders shared by the unit and acceptance tests.

#include "nvo/asset.hpp"
#include "nvo/camera.hpp"
#include "nvo/flut.hpp"
#include "nvo/octree.hpp"
#include "nvo/voxel_set.hpp"

#include "../oracles/dda.hpp"
#include "../oracles/dense_marcher.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <vector>

namespace testing_support {

using Rng = std::mt19937_64;

inline nvo::VoxelGrid unit_grid(std::uint32_t n, double lo = 0.0, double hi = 1.0) {
    nvo::VoxelGrid g;
    g.resolution = n;
    g.bounds = {nvo::Vec3::Constant(lo), nvo::Vec3::Constant(hi)};
    return g;
}

/// Each cell occupied independently with probability `fill` (at least one cell).
inline nvo::VoxelSet random_occupancy(const nvo::VoxelGrid& grid, double fill, Rng& rng) {
    nvo::VoxelSet set;
    set.grid = grid;
    std::bernoulli_distribution occupied(fill);
    for (std::uint32_t k = 0; k < grid.resolution; ++k)
        for (std::uint32_t j = 0; j < grid.resolution; ++j)
            for (std::uint32_t i = 0; i < grid.resolution; ++i)
                if (occupied(rng)) set.cells.push_back({i, j, k});
    if (set.cells.empty()) set.cells.push_back({0, 0, 0});
    std::shuffle(set.cells.begin(), set.cells.end(), rng);
    return set;
}

/// `count` distinct random cells.
inline nvo::VoxelSet random_cells(const nvo::VoxelGrid& grid, std::size_t count, Rng& rng) {
    std::uniform_int_distribution<std::uint32_t> coord(0, grid.resolution - 1);
    std::set<nvo::GridCoord> seen;
    nvo::VoxelSet set;
    set.grid = grid;
    while (set.cells.size() < count) {
        const nvo::GridCoord c{coord(rng), coord(rng), coord(rng)};
        if (seen.insert(c).second) set.cells.push_back(c);
    }
    return set;
}

inline nvo::Flut random_flut(std::size_t n, int degree, int channels, double sigma_lo, double sigma_hi, Rng& rng,
                             double coef_scale = 1.0) {
    nvo::Flut f(n, degree, channels);
    std::uniform_real_distribution<float> coef(static_cast<float>(-coef_scale), static_cast<float>(coef_scale));
    std::uniform_real_distribution<float> sigma(static_cast<float>(sigma_lo), static_cast<float>(sigma_hi));
    for (std::size_t i = 0; i < n; ++i) {
        for (int h = 0; h < f.basis_count(); ++h)
            for (int c = 0; c < channels; ++c) f.coefficient(i, h, c) = coef(rng);
        f.density(i) = sigma(rng);
    }
    return f;
}

inline nvo::Vec3 random_unit(Rng& rng) {
    std::normal_distribution<double> g;
    nvo::Vec3 v;
    do {
        v = nvo::Vec3(g(rng), g(rng), g(rng));
    } while (v.norm() < 1e-6);
    return v.normalized();
}

/// Ray from outside the box aimed at a uniform point inside it.
inline nvo::Ray random_ray_through(const nvo::Aabb& box, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const nvo::Vec3 target = box.lo + nvo::Vec3(u(rng), u(rng), u(rng)).cwiseProduct(box.extent());
    const nvo::Vec3 origin = box.center() + 1.5 * box.extent().norm() * random_unit(rng);
    return nvo::make_ray(origin, target - origin);
}

inline oracle::DenseGrid dense_grid(const nvo::VoxelSet& set) {
    oracle::DenseGrid g;
    g.n = static_cast<int>(set.grid.resolution);
    g.lo = {set.grid.bounds.lo.x(), set.grid.bounds.lo.y(), set.grid.bounds.lo.z()};
    g.cell = set.grid.cell_size();
    g.value.assign(static_cast<std::size_t>(g.n) * g.n * g.n, -1);
    for (std::size_t i = 0; i < set.cells.size(); ++i) {
        const auto& c = set.cells[i];
        g.value[c.i + g.n * (c.j + static_cast<std::size_t>(g.n) * c.k)] = static_cast<std::int64_t>(i);
    }
    return g;
}

inline oracle::DenseVolume dense_volume(const nvo::VoxelSet& set, const nvo::Flut& flut) {
    oracle::DenseVolume v;
    v.grid = dense_grid(set);
    v.degree = flut.sh_degree();
    v.channels = flut.channels();
    for (std::size_t i = 0; i < flut.size(); ++i) {
        v.sigma.push_back(flut.density(i));
        for (int h = 0; h < flut.basis_count(); ++h)
            for (int c = 0; c < flut.channels(); ++c) v.coefficients.push_back(flut.coefficient(i, h, c));
    }
    return v;
}

inline std::array<double, 3> arr(const nvo::Vec3& v) { return {v.x(), v.y(), v.z()}; }

/// Rigid single-joint asset over a voxel set.
inline nvo::Asset rigid_asset(const nvo::VoxelSet& set, nvo::Flut flut) {
    nvo::Asset a;
    a.voxels = set;
    a.flut = std::move(flut);
    a.weights = nvo::SkinWeights::rigid(set.size());
    return a;
}

/// Random rigged asset with f32-exact bounds, a random joint tree and 1-4
/// weights per voxel.
inline nvo::Asset random_asset(std::size_t voxels, Rng& rng) {
    std::uniform_int_distribution<int> level(1, 8);
    std::uint32_t n = 1u << level(rng);
    while (static_cast<std::size_t>(n) * n * n < voxels) n *= 2;
    // Multiples of 1/64 keep every corner exactly representable in f32.
    std::uniform_int_distribution<int> lo(-256, 0), ext(16, 512);
    const double a = lo(rng) / 64.0, b = lo(rng) / 64.0, c = lo(rng) / 64.0, e = ext(rng) / 64.0;
    nvo::VoxelGrid grid;
    grid.resolution = n;
    grid.bounds = {nvo::Vec3(a, b, c), nvo::Vec3(a + e, b + e, c + e)};
    nvo::Asset asset;
    asset.voxels = random_cells(grid, voxels, rng);
    std::uniform_int_distribution<int> degree(0, 4), channels(1, 4), joints(1, 12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    asset.flut = random_flut(voxels, degree(rng), channels(rng), 0.0, 50.0, rng, 3.0);
    std::vector<nvo::Joint> js;
    const int jc = joints(rng);
    for (int j = 0; j < jc; ++j) {
        const int parent = j == 0 ? -1 : std::uniform_int_distribution<int>(0, j - 1)(rng);
        js.push_back({"joint_" + std::to_string(j), parent,
                      nvo::RigidTransform(nvo::Quat(Eigen::AngleAxisd(3.0 * u(rng), random_unit(rng))),
                                          nvo::Vec3(u(rng), u(rng), u(rng)))});
    }
    asset.skeleton = nvo::Skeleton(js);
    std::vector<std::vector<nvo::JointWeight>> per(voxels);
    std::uniform_int_distribution<int> count(1, std::min(4, jc));
    std::uniform_real_distribution<float> w(0.1f, 1.0f);
    for (auto& v : per) {
        std::set<std::uint16_t> chosen;
        const int k = count(rng);
        while (static_cast<int>(chosen.size()) < k)
            chosen.insert(static_cast<std::uint16_t>(std::uniform_int_distribution<int>(0, jc - 1)(rng)));
        float total = 0.0f;
        for (const auto j : chosen) v.push_back({j, w(rng)}), total += v.back().weight;
        for (auto& jw : v) jw.weight /= total;
    }
    asset.weights = nvo::SkinWeights(per);
    return asset;
}

/// Field-by-field bit equality.
inline bool assets_equal(const nvo::Asset& a, const nvo::Asset& b) {
    if (a.voxels.grid.resolution != b.voxels.grid.resolution || a.voxels.grid.bounds.lo != b.voxels.grid.bounds.lo ||
        a.voxels.grid.bounds.hi != b.voxels.grid.bounds.hi || a.voxels.cells != b.voxels.cells || !(a.flut == b.flut) ||
        !(a.weights == b.weights) || a.skeleton.size() != b.skeleton.size()) {
        return false;
    }
    for (std::size_t j = 0; j < a.skeleton.size(); ++j) {
        const nvo::Joint& x = a.skeleton.joint(j);
        const nvo::Joint& y = b.skeleton.joint(j);
        if (x.name != y.name || x.parent != y.parent || x.bind_local.rotation().coeffs() != y.bind_local.rotation().coeffs() ||
            x.bind_local.translation() != y.bind_local.translation()) {
            return false;
        }
    }
    return true;
}

}  // namespace testing_support
