// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Fixed-step midpoint ray marcher over a dense piecewise-constant voxel
// field with SH color. Shares no code with the segment integrator.

#include "dda.hpp"
#include "sh_reference.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace oracle {

struct DenseVolume {
    DenseGrid grid;          // value = entry index or -1
    int degree = 0;
    int channels = 3;
    std::vector<double> sigma;         // per entry
    std::vector<double> coefficients;  // per entry, H x C, h-major
};

struct MarchResult {
    std::vector<double> color;
    double alpha = 0.0;
};

inline MarchResult march(const DenseVolume& v, const std::array<double, 3>& o, const std::array<double, 3>& d,
                         double step) {
    MarchResult out;
    out.color.assign(v.channels, 0.0);
    const DenseGrid& g = v.grid;
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        const double lo = g.lo[a], hi = g.lo[a] + g.cell * g.n;
        if (d[a] == 0.0) {
            if (o[a] < lo || o[a] > hi) return out;
            continue;
        }
        double n = (lo - o[a]) / d[a], f = (hi - o[a]) / d[a];
        if (n > f) std::swap(n, f);
        t0 = std::max(t0, n);
        t1 = std::min(t1, f);
    }
    if (!(t0 < t1)) return out;
    const std::vector<double> y = real_sh(d[0], d[1], d[2], v.degree);
    const int basis = static_cast<int>(y.size());
    double transmittance = 1.0;
    for (double a = t0; a < t1; a += step) {
        const double b = std::min(a + step, t1);
        const double tm = 0.5 * (a + b);
        std::array<int, 3> c{};
        for (int k = 0; k < 3; ++k) {
            c[k] = std::clamp(static_cast<int>(std::floor((o[k] + tm * d[k] - g.lo[k]) / g.cell)), 0, g.n - 1);
        }
        const std::int64_t e = g.at(c[0], c[1], c[2]);
        if (e < 0) continue;
        const double tau = v.sigma[e] * (b - a);
        const double w = transmittance * (1.0 - std::exp(-tau));
        for (int ch = 0; ch < v.channels; ++ch) {
            double s = 0.0;
            for (int h = 0; h < basis; ++h) {
                s += v.coefficients[(e * basis + h) * v.channels + ch] * y[h];
            }
            out.color[ch] += w * s;
        }
        out.alpha += w;
        transmittance *= std::exp(-tau);
    }
    return out;
}

}  // namespace oracle
