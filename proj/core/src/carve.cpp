// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/carve.hpp"

#include "nvo/error.hpp"

#include <tbb/blocked_range.h>
#include <tbb/enumerable_thread_specific.h>
#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace nvo {
namespace {

// 1D squared Euclidean distance transform (lower envelope of parabolas).
void distance_transform_1d(const double* f, int n, double* d, int* v, double* z) {
    const auto intersect = [f](int q, int p) {
        return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
    };
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s = intersect(q, v[k]);
        while (s <= z[k]) {
            --k;
            s = intersect(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) {
            ++k;
        }
        const double diff = q - v[k];
        d[q] = diff * diff + f[v[k]];
    }
}

const Image& require_alpha(const CarveView& view, std::size_t index) {
    const Image& a = view.alpha;
    if (a.width() != view.camera.width || a.height() != view.camera.height) {
        throw ContractError(fmt::format("mask {} is {}x{}, camera expects {}x{}", index, a.width(), a.height(),
                                        view.camera.width, view.camera.height));
    }
    if (a.channels() != 1 && a.channels() != 4) {
        throw ContractError(fmt::format("mask {} must have 1 or 4 channels", index));
    }
    return a;
}

}  // namespace

std::vector<std::uint8_t> dilated_mask(const Image& alpha, double threshold, int radius_px) {
    const int w = alpha.width();
    const int h = alpha.height();
    const int channel = alpha.channels() == 4 ? 3 : 0;
    std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h, 0);
    if (w == 0 || h == 0) {
        return out;
    }
    if (radius_px <= 0) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                out[static_cast<std::size_t>(y) * w + x] = alpha.at(x, y, channel) >= threshold;
            }
        }
        return out;
    }
    // Exact squared EDT, columns then rows.
    constexpr double kFar = 1e10;
    std::vector<double> grid(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            grid[static_cast<std::size_t>(y) * w + x] = alpha.at(x, y, channel) >= threshold ? 0.0 : kFar;
        }
    }
    const int n = std::max(w, h);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
        distance_transform_1d(f.data(), h, d.data(), v.data(), z.data());
        for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        double* row = grid.data() + static_cast<std::size_t>(y) * w;
        distance_transform_1d(row, w, d.data(), v.data(), z.data());
        for (int x = 0; x < w; ++x) {
            out[static_cast<std::size_t>(y) * w + x] = d[x] <= static_cast<double>(radius_px) * radius_px;
        }
    }
    return out;
}

VoxelSet carve_volume(std::span<const CarveView> views, const VoxelGrid& grid, const CarveOptions& options,
                      CarveReport* report) {
    grid.validate();
    if (views.empty()) {
        throw ContractError("carving needs at least one view");
    }
    if (!(options.alpha_threshold > 0.0 && options.alpha_threshold < 1.0)) {
        throw ContractError("alpha threshold must lie in (0, 1)");
    }
    std::vector<std::vector<std::uint8_t>> masks;
    masks.reserve(views.size());
    for (std::size_t v = 0; v < views.size(); ++v) {
        views[v].camera.validate();
        masks.push_back(dilated_mask(require_alpha(views[v], v), options.alpha_threshold, options.dilation_radius_px));
    }

    const std::uint32_t n = grid.resolution;
    const std::size_t total = static_cast<std::size_t>(n) * n * n;
    const auto coord_of = [n](std::size_t idx) {
        return GridCoord{static_cast<std::uint32_t>(idx % n), static_cast<std::uint32_t>((idx / n) % n),
                         static_cast<std::uint32_t>(idx / (static_cast<std::size_t>(n) * n))};
    };
    std::vector<std::uint8_t> keep(total, 0);
    tbb::enumerable_thread_specific<std::vector<std::size_t>> view_counts(
        [&] { return std::vector<std::size_t>(views.size(), 0); });
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, total), [&](const tbb::blocked_range<std::size_t>& r) {
        std::vector<std::size_t>& counts = view_counts.local();
        for (std::size_t idx = r.begin(); idx != r.end(); ++idx) {
            const Vec3 center = grid.cell_center(coord_of(idx));
            bool observed = false;
            bool carved = false;
            for (std::size_t v = 0; v < views.size(); ++v) {
                const Camera& cam = views[v].camera;
                const auto px = project(cam, center);
                bool pass = true;
                if (px) {
                    const double u = std::floor(px->x() + 0.5);
                    const double w = std::floor(px->y() + 0.5);
                    if (u >= 0.0 && u < cam.width && w >= 0.0 && w < cam.height) {
                        observed = true;
                        pass = masks[v][static_cast<std::size_t>(w) * cam.width + static_cast<std::size_t>(u)] != 0;
                    }
                }
                counts[v] += pass;
                carved |= !pass;
            }
            keep[idx] = (observed || options.keep_unobserved) && !carved;
        }
    });

    VoxelSet result;
    result.grid = grid;
    CarveReport local;
    local.candidate_cells = total;
    local.per_view_survivors.assign(views.size(), 0);
    for (const auto& counts : view_counts) {
        for (std::size_t v = 0; v < views.size(); ++v) {
            local.per_view_survivors[v] += counts[v];
        }
    }
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (keep[idx]) {
            result.cells.push_back(coord_of(idx));
        }
    }
    local.surviving_cells = result.cells.size();
    if (report) {
        *report = local;
    }
    if (result.cells.empty()) {
        throw CarvedEmptyError(local.per_view_survivors);
    }
    return result;
}

}  // namespace nvo
