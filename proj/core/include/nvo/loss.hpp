// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/flut.hpp"
#include "nvo/warp.hpp"

#include <array>
#include <span>

namespace nvo {

/// Rendered or reference value of one pixel: premultiplied color + alpha.
struct RaySample {
    std::array<double, kMaxChannels> color{};
    double alpha = 0.0;
};

/// Mean over rays of sum_c |pred_c - gt_c| + |pred_alpha - gt_alpha|.
/// Throws ContractError on length mismatch; zero for an empty batch.
double loss_rgba(std::span<const RaySample> pred, std::span<const RaySample> gt, int channels);

/// Mean over pairs of the mean absolute difference between the two
/// entries' full blocks (coefficients and density). Zero without pairs.
double loss_vrt(std::span<const CollisionPair> pairs, const Flut& flut);

}  // namespace nvo
