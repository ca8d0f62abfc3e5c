// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/loss.hpp"

#include "nvo/error.hpp"

#include <cmath>

namespace nvo {

double loss_rgba(std::span<const RaySample> pred, std::span<const RaySample> gt, int channels) {
    if (pred.size() != gt.size()) {
        throw ContractError("prediction and reference batches differ in length");
    }
    if (pred.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t r = 0; r < pred.size(); ++r) {
        double ray = std::abs(pred[r].alpha - gt[r].alpha);
        for (int c = 0; c < channels; ++c) {
            ray += std::abs(pred[r].color[c] - gt[r].color[c]);
        }
        total += ray;
    }
    return total / static_cast<double>(pred.size());
}

double loss_vrt(std::span<const CollisionPair> pairs, const Flut& flut) {
    if (pairs.empty()) {
        return 0.0;
    }
    const int stride = flut.stride();
    double total = 0.0;
    for (const CollisionPair& pair : pairs) {
        const auto a = flut.entry(pair.winner);
        const auto b = flut.entry(pair.loser);
        double sum = 0.0;
        for (int s = 0; s < stride; ++s) {
            sum += std::abs(static_cast<double>(a[s]) - static_cast<double>(b[s]));
        }
        total += sum / stride;
    }
    return total / static_cast<double>(pairs.size());
}

}  // namespace nvo
