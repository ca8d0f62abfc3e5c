// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Sequential max-density scan over live cells.

#include <cstdint>
#include <map>
#include <set>
#include <tuple>
#include <vector>

namespace oracle {

using CellKey = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>;

/// Winner per occupied live cell: highest sigma, earliest index on ties.
inline std::set<std::uint32_t> collision_winners(const std::vector<CellKey>& cells,
                                                 const std::vector<bool>& in_bounds,
                                                 const std::vector<float>& sigma) {
    std::map<CellKey, std::uint32_t> best;
    for (std::uint32_t i = 0; i < cells.size(); ++i) {
        if (!in_bounds[i]) continue;
        auto [it, inserted] = best.emplace(cells[i], i);
        if (!inserted && sigma[i] > sigma[it->second]) it->second = i;
    }
    std::set<std::uint32_t> winners;
    for (const auto& [cell, i] : best) winners.insert(i);
    return winners;
}

}  // namespace oracle
