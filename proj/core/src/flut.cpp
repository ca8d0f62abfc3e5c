// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/flut.hpp"

#include "nvo/error.hpp"

#include <algorithm>

namespace nvo {

Flut::Flut(std::size_t entries, int sh_degree, int channels)
    : entries_(entries), sh_degree_(sh_degree), channels_(channels) {
    if (sh_degree < 0 || sh_degree > kMaxShDegree) {
        throw ContractError("FLUT SH degree must be in [0, 4]");
    }
    if (channels < 1 || channels > kMaxChannels) {
        throw ContractError("FLUT channel count must be in [1, 16]");
    }
    values_.assign(entries * static_cast<std::size_t>(stride()), 0.0f);
}

void Flut::clamp_densities() {
    for (std::size_t i = 0; i < entries_; ++i) {
        density(i) = std::max(density(i), 0.0f);
    }
}

}  // namespace nvo
