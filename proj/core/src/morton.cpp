// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/morton.hpp"

#include "nvo/error.hpp"

#include <fmt/format.h>

namespace nvo {

std::uint64_t morton_encode(std::uint32_t i, std::uint32_t j, std::uint32_t k) {
    if (i >= kMortonCoordLimit || j >= kMortonCoordLimit || k >= kMortonCoordLimit) {
        throw ContractError(fmt::format("morton coordinate ({}, {}, {}) exceeds 21 bits", i, j, k));
    }
    return morton_encode_unchecked(i, j, k);
}

}  // namespace nvo
