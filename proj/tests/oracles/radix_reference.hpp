// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Sequential reference radix tree: sort, then split ranges top-down at the
// highest differing bit.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

struct RadixRange {
    std::uint32_t first, last, split;
    friend auto operator<=>(const RadixRange&, const RadixRange&) = default;
};

inline std::vector<std::pair<std::uint64_t, std::uint32_t>> sorted_leaves(
    std::vector<std::pair<std::uint64_t, std::uint32_t>> leaves) {
    std::sort(leaves.begin(), leaves.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return leaves;
}

inline void split_ranges(const std::vector<std::uint64_t>& codes, std::uint32_t first, std::uint32_t last,
                         std::vector<RadixRange>& out) {
    if (first == last) return;
    const int prefix = std::countl_zero(codes[first] ^ codes[last]);
    std::uint32_t split = first;
    while (split + 1 <= last && std::countl_zero(codes[first] ^ codes[split + 1]) > prefix) ++split;
    out.push_back({first, last, split});
    split_ranges(codes, first, split, out);
    split_ranges(codes, split + 1, last, out);
}

/// All internal ranges, sorted.
inline std::vector<RadixRange> radix_ranges(const std::vector<std::uint64_t>& sorted_codes) {
    std::vector<RadixRange> out;
    if (!sorted_codes.empty()) split_ranges(sorted_codes, 0, static_cast<std::uint32_t>(sorted_codes.size() - 1), out);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace oracle
