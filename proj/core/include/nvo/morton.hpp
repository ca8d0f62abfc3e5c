// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>

namespace nvo {

/// Integer cell coordinate on a voxel grid.
struct GridCoord {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    std::uint32_t k = 0;

    friend auto operator<=>(const GridCoord&, const GridCoord&) = default;
};

inline constexpr std::uint32_t kMortonCoordLimit = 1u << 21;

namespace detail {

constexpr std::uint64_t spread_bits(std::uint64_t v) {
    v &= 0x1fffff;
    v = (v | v << 32) & 0x1f00000000ffffULL;
    v = (v | v << 16) & 0x1f0000ff0000ffULL;
    v = (v | v << 8) & 0x100f00f00f00f00fULL;
    v = (v | v << 4) & 0x10c30c30c30c30c3ULL;
    v = (v | v << 2) & 0x1249249249249249ULL;
    return v;
}

constexpr std::uint32_t compact_bits(std::uint64_t v) {
    v &= 0x1249249249249249ULL;
    v = (v ^ (v >> 2)) & 0x10c30c30c30c30c3ULL;
    v = (v ^ (v >> 4)) & 0x100f00f00f00f00fULL;
    v = (v ^ (v >> 8)) & 0x1f0000ff0000ffULL;
    v = (v ^ (v >> 16)) & 0x1f00000000ffffULL;
    v = (v ^ (v >> 32)) & 0x1fffffULL;
    return static_cast<std::uint32_t>(v);
}

}  // namespace detail

/// Interleaves without range checks; x occupies bit 0, y bit 1, z bit 2.
constexpr std::uint64_t morton_encode_unchecked(std::uint32_t i, std::uint32_t j, std::uint32_t k) {
    return detail::spread_bits(i) | detail::spread_bits(j) << 1 | detail::spread_bits(k) << 2;
}

/// Throws ContractError when any coordinate is >= 2^21.
std::uint64_t morton_encode(std::uint32_t i, std::uint32_t j, std::uint32_t k);

inline std::uint64_t morton_encode(const GridCoord& c) { return morton_encode(c.i, c.j, c.k); }

constexpr GridCoord morton_decode(std::uint64_t code) {
    return {detail::compact_bits(code), detail::compact_bits(code >> 1), detail::compact_bits(code >> 2)};
}

}  // namespace nvo
