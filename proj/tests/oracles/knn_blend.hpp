// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Brute-force nearest-vertex weight blending: full sorted distance list,
// softmax over the first m offsets.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

using Point = std::array<double, 3>;
using Weights = std::vector<std::pair<int, double>>;

inline std::map<int, double> blend_weights(const Point& q, const std::vector<Point>& vertices,
                                           const std::vector<Weights>& vertex_weights, std::size_t m,
                                           bool nearer = true) {
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        const double dx = vertices[v][0] - q[0], dy = vertices[v][1] - q[1], dz = vertices[v][2] - q[2];
        dist.push_back({std::sqrt(dx * dx + dy * dy + dz * dz), v});
    }
    std::sort(dist.begin(), dist.end());
    m = std::min(m, dist.size());
    const double d0 = dist[0].first;
    double norm = 0.0;
    std::vector<double> alpha(m);
    for (std::size_t j = 0; j < m; ++j) {
        alpha[j] = std::exp((nearer ? -1.0 : 1.0) * (dist[j].first - d0));
        norm += alpha[j];
    }
    std::map<int, double> out;
    for (std::size_t j = 0; j < m; ++j) {
        for (const auto& [joint, w] : vertex_weights[dist[j].second]) {
            out[joint] += alpha[j] / norm * w;
        }
    }
    double total = 0.0;
    for (const auto& [joint, w] : out) total += w;
    for (auto& [joint, w] : out) w /= total;
    return out;
}

}  // namespace oracle
