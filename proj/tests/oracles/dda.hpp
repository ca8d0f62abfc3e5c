// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense 3D-DDA grid walker (Amanatides & Woo) over an occupancy array.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace oracle {

struct DenseGrid {
    int n = 0;
    std::array<double, 3> lo{};
    double cell = 1.0;
    /// Value per cell, -1 for empty; index x + n * (y + n * z).
    std::vector<std::int64_t> value;

    std::int64_t at(int x, int y, int z) const { return value[x + n * (y + static_cast<std::int64_t>(n) * z)]; }
};

struct DdaHit {
    std::int64_t value;
    double t_enter;
    double t_exit;
};

inline std::vector<DdaHit> dda_walk(const DenseGrid& g, const std::array<double, 3>& o, const std::array<double, 3>& d,
                                    double t_min, double t_max) {
    std::vector<DdaHit> hits;
    double t0 = t_min, t1 = t_max;
    for (int a = 0; a < 3; ++a) {
        const double lo = g.lo[a], hi = g.lo[a] + g.cell * g.n;
        if (d[a] == 0.0) {
            if (o[a] < lo || o[a] > hi) return hits;
            continue;
        }
        double n = (lo - o[a]) / d[a], f = (hi - o[a]) / d[a];
        if (n > f) std::swap(n, f);
        t0 = std::max(t0, n);
        t1 = std::min(t1, f);
    }
    if (!(t0 < t1)) return hits;
    // Starting cell from the midpoint-safe entry position.
    std::array<int, 3> c{}, step{};
    std::array<double, 3> t_next{};
    for (int a = 0; a < 3; ++a) {
        const double p = o[a] + t0 * d[a];
        int idx = static_cast<int>(std::floor((p - g.lo[a]) / g.cell));
        // On a face, pick the cell the ray moves into.
        if (d[a] < 0.0 && p - (g.lo[a] + idx * g.cell) == 0.0) idx -= 1;
        c[a] = std::clamp(idx, 0, g.n - 1);
        if (d[a] > 0.0) {
            step[a] = 1;
            t_next[a] = (g.lo[a] + (c[a] + 1) * g.cell - o[a]) / d[a];
        } else if (d[a] < 0.0) {
            step[a] = -1;
            t_next[a] = (g.lo[a] + c[a] * g.cell - o[a]) / d[a];
        } else {
            step[a] = 0;
            t_next[a] = std::numeric_limits<double>::infinity();
        }
    }
    double t = t0;
    while (t < t1) {
        int axis = 0;
        if (t_next[1] < t_next[axis]) axis = 1;
        if (t_next[2] < t_next[axis]) axis = 2;
        const double exit = std::min(t_next[axis], t1);
        const std::int64_t v = g.at(c[0], c[1], c[2]);
        if (v >= 0 && exit > t) hits.push_back({v, t, exit});
        t = exit;
        c[axis] += step[axis];
        if (c[axis] < 0 || c[axis] >= g.n) break;
        t_next[axis] = (g.lo[axis] + (step[axis] > 0 ? c[axis] + 1 : c[axis]) * g.cell - o[axis]) / d[axis];
    }
    return hits;
}

}  // namespace oracle
