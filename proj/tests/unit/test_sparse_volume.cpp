// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/carve.hpp"
#include "nvo/error.hpp"
#include "nvo/flut.hpp"
#include "nvo/morton.hpp"
#include "nvo/octree.hpp"
#include "nvo/parallel.hpp"

#include "../oracles/dda.hpp"
#include "../oracles/radix_reference.hpp"
#include "../support/scenes.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace nvo;
using namespace testing_support;

TEST(Morton, HandInterleavedValues) {
    EXPECT_EQ(morton_encode(0, 0, 0), 0u);
    EXPECT_EQ(morton_encode(1, 1, 1), 7u);
    EXPECT_EQ(morton_encode(3, 0, 0), 9u);
    EXPECT_EQ(morton_encode(0, 1, 0), 2u);
    EXPECT_EQ(morton_encode(0, 0, 1), 4u);
}

TEST(Morton, RoundTripAndRange) {
    Rng rng(11);
    std::uniform_int_distribution<std::uint32_t> c(0, kMortonCoordLimit - 1);
    for (int n = 0; n < 10000; ++n) {
        const GridCoord g{c(rng), c(rng), c(rng)};
        EXPECT_EQ(morton_decode(morton_encode(g)), g);
    }
    EXPECT_EQ(morton_decode(morton_encode(kMortonCoordLimit - 1, 0, kMortonCoordLimit - 1)),
              (GridCoord{kMortonCoordLimit - 1, 0, kMortonCoordLimit - 1}));
    EXPECT_THROW(morton_encode(kMortonCoordLimit, 0, 0), ContractError);
    EXPECT_THROW(morton_encode(0, 0, kMortonCoordLimit), ContractError);
}

TEST(VoxelGrid, CellMappingAndValidation) {
    const VoxelGrid g = unit_grid(4);
    EXPECT_EQ(g.cell_of(Vec3(0.1, 0.3, 0.99))->k, 3u);
    EXPECT_EQ(g.cell_of(Vec3(1.0, 1.0, 1.0))->i, 3u);
    EXPECT_FALSE(g.cell_of(Vec3(1.01, 0.5, 0.5)).has_value());
    EXPECT_LT((g.cell_center({1, 2, 3}) - Vec3(0.375, 0.625, 0.875)).norm(), 1e-15);
    VoxelGrid bad = g;
    bad.resolution = 6;
    EXPECT_THROW(bad.validate(), ContractError);
    bad = g;
    bad.bounds.hi = Vec3(1, 2, 1);
    EXPECT_THROW(bad.validate(), ContractError);
    VoxelSet dup;
    dup.grid = g;
    dup.cells = {{0, 0, 0}, {0, 0, 0}};
    EXPECT_THROW(dup.validate(), ContractError);
}

TEST(Octree, SingleLeaf) {
    VoxelSet set;
    set.grid = unit_grid(8);
    set.cells = {{3, 4, 5}};
    const VoxelOctree tree = build_octree(set);
    EXPECT_EQ(tree.size(), 1u);
    EXPECT_TRUE(tree.nodes().empty());
    EXPECT_EQ(tree.query_point(set.center(0)), 0u);
    EXPECT_FALSE(tree.query_point(Vec3(0.01, 0.01, 0.01)).has_value());
    const Vec3 c = set.center(0);
    const auto segs = tree.traverse_ray(make_ray(Vec3(c.x(), c.y(), -1.0), Vec3::UnitZ()), 0.0, 10.0);
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_NEAR(segs[0].length(), 0.125, 1e-12);
}

TEST(Octree, FullTwoByTwoByTwo) {
    VoxelSet set;
    set.grid = unit_grid(2);
    for (std::uint32_t k = 0; k < 2; ++k)
        for (std::uint32_t j = 0; j < 2; ++j)
            for (std::uint32_t i = 0; i < 2; ++i) set.cells.push_back({i, j, k});
    const VoxelOctree tree = build_octree(set);
    Rng rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 0; n < 1000; ++n) {
        const Vec3 p(u(rng), u(rng), u(rng));
        const auto hit = tree.query_point(p);
        ASSERT_TRUE(hit.has_value());
        EXPECT_EQ(set.cells[*hit], *set.grid.cell_of(p));
    }
}

TEST(Octree, MatchesSequentialReferenceBuild) {
    Rng rng(13);
    const VoxelSet set = random_cells(unit_grid(256), 100000, rng);
    std::vector<std::uint32_t> indices(set.size());
    std::vector<std::pair<std::uint64_t, std::uint32_t>> ref;
    for (std::uint32_t i = 0; i < set.size(); ++i) {
        indices[i] = i;
        ref.push_back({morton_encode(set.cells[i]), i});
    }
    ref = oracle::sorted_leaves(ref);
    std::vector<std::uint64_t> codes;
    for (const auto& [code, idx] : ref) codes.push_back(code);
    const auto ranges = oracle::radix_ranges(codes);

    for (const int threads : {1, 2, 4, 8}) {
        ThreadLimit limit(threads);
        const VoxelOctree tree = build_octree(set.grid, set.cells, indices);
        ASSERT_EQ(tree.leaves().size(), ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            ASSERT_EQ(tree.leaves()[i].morton, ref[i].first);
            ASSERT_EQ(tree.leaves()[i].flut_index, ref[i].second);
        }
        std::vector<oracle::RadixRange> got;
        for (const OctreeNode& node : tree.nodes()) got.push_back({node.first, node.last, node.split});
        std::sort(got.begin(), got.end());
        ASSERT_EQ(got, ranges) << threads << " threads";
    }
}

TEST(Octree, BitIdenticalAcrossThreadCounts) {
    Rng rng(14);
    const VoxelSet set = random_cells(unit_grid(128), 50000, rng);
    std::vector<OctreeLeaf> leaves;
    std::vector<OctreeNode> nodes;
    for (const int threads : {1, 2, 4, 8}) {
        ThreadLimit limit(threads);
        const VoxelOctree tree = build_octree(set);
        const std::vector<OctreeLeaf> l(tree.leaves().begin(), tree.leaves().end());
        const std::vector<OctreeNode> n(tree.nodes().begin(), tree.nodes().end());
        if (threads == 1) {
            leaves = l;
            nodes = n;
        } else {
            EXPECT_EQ(l, leaves);
            EXPECT_EQ(n, nodes);
        }
    }
}

TEST(Octree, RejectsDuplicatesAndBadInput) {
    VoxelSet set;
    set.grid = unit_grid(8);
    set.cells = {{1, 2, 3}, {4, 4, 4}, {1, 2, 3}};
    EXPECT_THROW(build_octree(set), ContractError);
    set.cells = {{1, 2, 8}};
    EXPECT_THROW(build_octree(set), ContractError);
    set.cells.clear();
    EXPECT_THROW(build_octree(set), ContractError);
}

TEST(Octree, QueryMatchesLinearScan) {
    Rng rng(15);
    const VoxelSet set = random_occupancy(unit_grid(32, -1.0, 1.0), 0.3, rng);
    const VoxelOctree tree = build_octree(set);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int n = 0; n < 10000; ++n) {
        const Vec3 p(u(rng), u(rng), u(rng));
        std::optional<std::uint32_t> expected;
        if (const auto cell = set.grid.cell_of(p)) {
            for (std::uint32_t i = 0; i < set.size(); ++i)
                if (set.cells[i] == *cell) expected = i;
        }
        ASSERT_EQ(tree.query_point(p), expected);
    }
    for (std::uint32_t i = 0; i < set.size(); ++i) ASSERT_EQ(tree.query_point(set.center(i)), i);
}

TEST(Octree, RayMissingBoundsIsEmpty) {
    Rng rng(16);
    const VoxelSet set = random_occupancy(unit_grid(8), 0.5, rng);
    const VoxelOctree tree = build_octree(set);
    EXPECT_TRUE(tree.traverse_ray(make_ray(Vec3(2, 2, 2), Vec3(1, 0, 0)), 0.0, 100.0).empty());
    EXPECT_TRUE(tree.traverse_ray(make_ray(Vec3(-1, 0.5, 0.5), Vec3(-1, 0, 0)), 0.0, 100.0).empty());
}

TEST(Octree, AxisAlignedRayThroughFullGrid) {
    VoxelSet set;
    set.grid = unit_grid(4);
    for (std::uint32_t k = 0; k < 4; ++k)
        for (std::uint32_t j = 0; j < 4; ++j)
            for (std::uint32_t i = 0; i < 4; ++i) set.cells.push_back({i, j, k});
    const VoxelOctree tree = build_octree(set);
    for (int axis = 0; axis < 3; ++axis) {
        for (const double sign : {1.0, -1.0}) {
            Vec3 o(0.3, 0.6, 0.45), d = Vec3::Zero();
            o[axis] = sign > 0 ? -2.0 : 3.0;
            d[axis] = sign;
            const auto segs = tree.traverse_ray(make_ray(o, d), 0.0, 100.0);
            ASSERT_EQ(segs.size(), 4u);
            double total = 0.0;
            for (std::size_t s = 0; s < 4; ++s) {
                EXPECT_NEAR(segs[s].length(), 0.25, 1e-12);
                if (s) EXPECT_NEAR(segs[s].t_enter, segs[s - 1].t_exit, 1e-12);
                total += segs[s].length();
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(Octree, TraversalMatchesDdaWalker) {
    Rng rng(17);
    for (int scene = 0; scene < 5; ++scene) {
        const VoxelSet set = random_occupancy(unit_grid(32, -1.0, 1.0), 0.25, rng);
        const VoxelOctree tree = build_octree(set);
        const oracle::DenseGrid grid = dense_grid(set);
        for (int n = 0; n < 200; ++n) {
            const Ray ray = random_ray_through(set.grid.bounds, rng);
            const auto segs = tree.traverse_ray(ray, 0.0, 100.0);
            const auto ref = oracle::dda_walk(grid, arr(ray.origin), arr(ray.direction), 0.0, 100.0);
            ASSERT_EQ(segs.size(), ref.size());
            double sum = 0.0, ref_sum = 0.0;
            for (std::size_t s = 0; s < segs.size(); ++s) {
                ASSERT_EQ(static_cast<std::int64_t>(segs[s].flut_index), ref[s].value);
                EXPECT_GT(segs[s].length(), 0.0);
                if (s) EXPECT_GE(segs[s].t_enter, segs[s - 1].t_exit - 1e-12);
                sum += segs[s].length();
                ref_sum += ref[s].t_exit - ref[s].t_enter;
            }
            EXPECT_NEAR(sum, ref_sum, 1e-5);
        }
    }
}

TEST(Octree, SegmentLengthsBoundedByChord) {
    Rng rng(18);
    const VoxelSet set = random_occupancy(unit_grid(16), 0.4, rng);
    const VoxelOctree tree = build_octree(set);
    VoxelSet full;
    full.grid = set.grid;
    for (std::uint32_t k = 0; k < 16; ++k)
        for (std::uint32_t j = 0; j < 16; ++j)
            for (std::uint32_t i = 0; i < 16; ++i) full.cells.push_back({i, j, k});
    const VoxelOctree full_tree = build_octree(full);
    for (int n = 0; n < 300; ++n) {
        const Ray ray = random_ray_through(set.grid.bounds, rng);
        double t0 = 0.0, t1 = 1e9;
        for (int a = 0; a < 3; ++a) {
            double lo = (0.0 - ray.origin[a]) / ray.direction[a], hi = (1.0 - ray.origin[a]) / ray.direction[a];
            if (lo > hi) std::swap(lo, hi);
            t0 = std::max(t0, lo);
            t1 = std::min(t1, hi);
        }
        const double chord = std::max(0.0, t1 - t0);
        double sparse = 0.0, dense = 0.0;
        for (const auto& s : tree.traverse_ray(ray, 0.0, 1e9)) sparse += s.length();
        for (const auto& s : full_tree.traverse_ray(ray, 0.0, 1e9)) dense += s.length();
        EXPECT_LE(sparse, chord + 1e-9);
        EXPECT_NEAR(dense, chord, 1e-9);
    }
}

TEST(Octree, TraversalHonoursParameterWindow) {
    VoxelSet set;
    set.grid = unit_grid(4);
    for (std::uint32_t i = 0; i < 4; ++i) set.cells.push_back({i, 1, 1});
    const VoxelOctree tree = build_octree(set);
    const Ray ray = make_ray(Vec3(-1, 0.3, 0.3), Vec3::UnitX());
    const auto segs = tree.traverse_ray(ray, 1.1, 1.6);
    ASSERT_EQ(segs.size(), 3u);
    EXPECT_NEAR(segs.front().t_enter, 1.1, 1e-12);
    EXPECT_NEAR(segs.back().t_exit, 1.6, 1e-12);
}

namespace {

Camera axis_camera(int size) {
    // Looking down -z at the unit cube from above, orthographic-ish narrow field.
    return look_at_camera(Vec3(0.5, 0.5, 6.0), Vec3(0.5, 0.5, 0.5), Vec3::UnitY(), 0.3, size, size);
}

}  // namespace

TEST(Carve, OpaqueMasksKeepEveryObservedCell) {
    const VoxelGrid grid = unit_grid(16);
    const Camera cam = look_at_camera(Vec3(0.5, 0.5, 2.2), Vec3(0.5, 0.5, 0.5), Vec3::UnitY(), 0.5, 40, 40);
    const CarveView view{cam, Image(40, 40, 1, 1.0f)};
    const VoxelSet carved = carve_volume(std::span(&view, 1), grid);
    std::size_t expected = 0;
    for (std::uint32_t k = 0; k < 16; ++k)
        for (std::uint32_t j = 0; j < 16; ++j)
            for (std::uint32_t i = 0; i < 16; ++i) {
                const auto px = project(cam, grid.cell_center({i, j, k}));
                if (px && std::floor(px->x() + 0.5) >= 0 && std::floor(px->x() + 0.5) < 40 &&
                    std::floor(px->y() + 0.5) >= 0 && std::floor(px->y() + 0.5) < 40)
                    ++expected;
            }
    EXPECT_EQ(carved.size(), expected);
    EXPECT_LT(carved.size(), 16u * 16u * 16u);  // the near corners leave the frustum
    EXPECT_GT(carved.size(), 0u);
}

TEST(Carve, HalfMaskMatchesPerCellProjection) {
    const VoxelGrid grid = unit_grid(16);
    const Camera cam = axis_camera(64);
    Image alpha(64, 64, 1, 0.0f);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 32; ++x) alpha.at(x, y, 0) = 1.0f;
    const CarveView view{cam, alpha};
    CarveOptions opts;
    opts.dilation_radius_px = 0;
    const VoxelSet carved = carve_volume(std::span(&view, 1), grid, opts);
    std::set<GridCoord> expected;
    for (std::uint32_t k = 0; k < 16; ++k)
        for (std::uint32_t j = 0; j < 16; ++j)
            for (std::uint32_t i = 0; i < 16; ++i) {
                const auto px = project(cam, grid.cell_center({i, j, k}));
                if (!px) continue;
                const double u = std::floor(px->x() + 0.5), v = std::floor(px->y() + 0.5);
                if (u >= 0 && u < 32 && v >= 0 && v < 64) expected.insert({i, j, k});
            }
    EXPECT_EQ(std::set<GridCoord>(carved.cells.begin(), carved.cells.end()), expected);
}

TEST(Carve, DilationIsAEuclideanDisc) {
    Rng rng(19);
    Image alpha(40, 30, 1, 0.0f);
    std::bernoulli_distribution b(0.01);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 40; ++x) alpha.at(x, y, 0) = b(rng) ? 0.5f : 0.001f;
    for (const int radius : {0, 1, 3, 5}) {
        const auto mask = dilated_mask(alpha, 0.005, radius);
        for (int y = 0; y < 30; ++y)
            for (int x = 0; x < 40; ++x) {
                bool near = false;
                for (int yy = 0; yy < 30; ++yy)
                    for (int xx = 0; xx < 40; ++xx)
                        if (alpha.at(xx, yy, 0) >= 0.005f && (xx - x) * (xx - x) + (yy - y) * (yy - y) <= radius * radius)
                            near = true;
                ASSERT_EQ(mask[y * 40 + x] != 0, near) << x << "," << y << " r=" << radius;
            }
    }
}

namespace {

struct SphereViews {
    std::vector<CarveView> views;
    Vec3 center{0.5, 0.5, 0.5};
    double radius = 0.3;
};

SphereViews sphere_views(std::size_t count, int size) {
    SphereViews s;
    for (std::size_t v = 0; v < count; ++v) {
        const double az = 2.0 * std::numbers::pi * v / count;
        const double el = (v % 3 == 0 ? 0.5 : (v % 3 == 1 ? -0.3 : 0.1));
        const Camera cam = orbit_camera(az, el, 2.5, s.center, 0.7, size, size);
        Image alpha(size, size, 1, 0.0f);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const Ray r = ray_from_pixel(cam, Vec2(x, y));
                const Vec3 oc = r.origin - s.center;
                const double b = oc.dot(r.direction);
                if (b * b - (oc.squaredNorm() - s.radius * s.radius) > 0.0) alpha.at(x, y, 0) = 1.0f;
            }
        s.views.push_back({cam, alpha});
    }
    return s;
}

}  // namespace

TEST(Carve, SphereHullIsConservativeAndTight) {
    const SphereViews s = sphere_views(30, 96);
    const VoxelGrid grid = unit_grid(32);
    CarveOptions opts;
    opts.dilation_radius_px = 2;
    const VoxelSet carved = carve_volume(s.views, grid, opts);
    const std::set<GridCoord> kept(carved.cells.begin(), carved.cells.end());
    // Dilation radius in world units at the sphere's depth plus one cell diagonal.
    const double px_world = 2.5 * 2.0 * std::tan(0.35) / 96.0;
    const double slack = opts.dilation_radius_px * px_world * 1.5 + std::sqrt(3.0) * grid.cell_size();
    for (std::uint32_t k = 0; k < 32; ++k)
        for (std::uint32_t j = 0; j < 32; ++j)
            for (std::uint32_t i = 0; i < 32; ++i) {
                const double d = (grid.cell_center({i, j, k}) - s.center).norm();
                if (d <= s.radius) EXPECT_TRUE(kept.count({i, j, k})) << i << "," << j << "," << k;
                if (kept.count({i, j, k})) EXPECT_LE(d, s.radius + slack);
            }
}

TEST(Carve, Monotonicity) {
    const SphereViews s = sphere_views(8, 48);
    const VoxelGrid grid = unit_grid(16);
    CarveOptions opts;
    opts.keep_unobserved = true;
    std::size_t previous = grid.resolution * grid.resolution * grid.resolution + 1;
    for (std::size_t v = 1; v <= s.views.size(); ++v) {
        const VoxelSet carved = carve_volume(std::span(s.views.data(), v), grid, opts);
        EXPECT_LE(carved.size(), previous);
        previous = carved.size();
    }
    std::set<GridCoord> prev_set;
    for (const int r : {0, 1, 2, 4, 8}) {
        opts.dilation_radius_px = r;
        const VoxelSet carved = carve_volume(s.views, grid, opts);
        const std::set<GridCoord> now(carved.cells.begin(), carved.cells.end());
        EXPECT_TRUE(std::includes(now.begin(), now.end(), prev_set.begin(), prev_set.end()));
        prev_set = now;
    }
}

TEST(Carve, EmptyResultReportsPerViewCounts) {
    const SphereViews s = sphere_views(3, 32);
    std::vector<CarveView> views = s.views;
    for (auto& v : views) v.alpha = Image(32, 32, 1, 0.0f);
    try {
        carve_volume(views, unit_grid(8));
        FAIL() << "expected carved-empty";
    } catch (const CarvedEmptyError& e) {
        EXPECT_EQ(e.category(), ErrorCategory::kCarvedEmpty);
        EXPECT_EQ(e.per_view_survivors().size(), 3u);
    }
}

TEST(Carve, RejectsBadInput) {
    EXPECT_THROW(carve_volume({}, unit_grid(8)), ContractError);
    const SphereViews s = sphere_views(1, 16);
    CarveOptions opts;
    opts.alpha_threshold = 0.0;
    EXPECT_THROW(carve_volume(s.views, unit_grid(8), opts), ContractError);
    std::vector<CarveView> wrong = s.views;
    wrong[0].alpha = Image(8, 8, 1, 1.0f);
    EXPECT_THROW(carve_volume(wrong, unit_grid(8)), ContractError);
}

TEST(Flut, LayoutAndClamp) {
    Flut f(3, 2, 3);
    EXPECT_EQ(f.basis_count(), 9);
    EXPECT_EQ(f.stride(), 28);
    f.coefficient(1, 4, 2) = 5.0f;
    f.density(1) = -2.0f;
    EXPECT_EQ(f.data()[28 + 4 * 3 + 2], 5.0f);
    EXPECT_EQ(f.data()[28 + 27], -2.0f);
    f.clamp_densities();
    EXPECT_EQ(f.density(1), 0.0f);
    EXPECT_THROW(Flut(1, 5, 3), ContractError);
    EXPECT_THROW(Flut(1, 1, 17), ContractError);
}
