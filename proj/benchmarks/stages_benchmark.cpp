// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

// Per-stage CPU timings on the generated ball asset. Arguments are voxel
// counts; thread-count variants use the second argument.

#include "nvo/octree.hpp"
#include "nvo/parallel.hpp"
#include "nvo/renderer.hpp"
#include "nvo/synthetic.hpp"
#include "nvo/warp.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

namespace {

const nvo::Asset& asset_of(std::size_t voxels) {
    static std::map<std::size_t, std::unique_ptr<nvo::Asset>> cache;
    auto& slot = cache[voxels];
    if (!slot) {
        slot = std::make_unique<nvo::Asset>(nvo::make_benchmark_asset(voxels, 1));
    }
    return *slot;
}

nvo::Camera bench_camera(const nvo::Asset& asset, int size) {
    return nvo::orbit_camera(0.0, 0.3, 1.5 * asset.voxels.grid.bounds.extent().x(), asset.voxels.grid.bounds.center(),
                             0.785398163397448, size, size);
}

void BM_Warp(benchmark::State& state) {
    const nvo::Asset& asset = asset_of(static_cast<std::size_t>(state.range(0)));
    const nvo::Pose pose = nvo::benchmark_pose();
    for (auto _ : state) {
        benchmark::DoNotOptimize(nvo::warp_voxels(asset.voxels, asset.weights, asset.skeleton, pose));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Warp)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_BuildOctree(benchmark::State& state) {
    const nvo::Asset& asset = asset_of(static_cast<std::size_t>(state.range(0)));
    const nvo::ThreadLimit limit(static_cast<int>(state.range(1)));
    const nvo::WarpResult warp = nvo::warp_voxels(asset.voxels, asset.weights, asset.skeleton, nvo::benchmark_pose());
    const nvo::ResolvedVoxels resolved = nvo::resolve_collisions(warp, asset.flut);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nvo::build_octree(asset.voxels.grid, resolved.cells, resolved.flut_indices));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(resolved.cells.size()));
}
BENCHMARK(BM_BuildOctree)
    ->ArgsProduct({{100000, 1000000}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_RenderVolume(benchmark::State& state) {
    const nvo::Asset& asset = asset_of(static_cast<std::size_t>(state.range(0)));
    const nvo::PosedVolume volume = nvo::pose_asset(asset, nvo::benchmark_pose());
    const nvo::Camera camera = bench_camera(asset, static_cast<int>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(nvo::render_volume(volume, asset.flut, camera, {}));
    }
    state.SetItemsProcessed(state.iterations() * state.range(1) * state.range(1));
}
BENCHMARK(BM_RenderVolume)->Args({100000, 256})->Args({1000000, 512})->Unit(benchmark::kMillisecond);

void BM_IntegrateRay(benchmark::State& state) {
    const nvo::Asset& asset = asset_of(100000);
    const nvo::PosedVolume volume = nvo::pose_asset(asset, nvo::benchmark_pose());
    const nvo::Camera camera = bench_camera(asset, 64);
    const nvo::Ray ray = nvo::ray_from_pixel(camera, nvo::Vec2(32.0, 32.0));
    nvo::RenderOptions options;
    options.early_stop_enabled = state.range(0) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(nvo::integrate_ray(volume.octree, asset.flut, ray, volume.rotations, options));
    }
}
BENCHMARK(BM_IntegrateRay)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
