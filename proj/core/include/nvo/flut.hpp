// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/sh.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace nvo {

inline constexpr int kMaxChannels = 16;

/// Features look-up table: per voxel, H x C SH coefficients followed by one
/// density value. Coefficient (h, c) of entry i lives at
/// data[i * stride + h * C + c]; the density at data[i * stride + H * C].
class Flut {
public:
    Flut() = default;
    /// Zero-initialized table. Throws ContractError on a degree outside
    /// [0, 4] or a channel count outside [1, 16].
    Flut(std::size_t entries, int sh_degree, int channels);

    std::size_t size() const { return entries_; }
    int sh_degree() const { return sh_degree_; }
    int channels() const { return channels_; }
    int basis_count() const { return sh_basis_count(sh_degree_); }
    int coefficient_count() const { return basis_count() * channels_; }
    int stride() const { return coefficient_count() + 1; }

    std::span<float> entry(std::size_t i) { return {values_.data() + i * stride(), static_cast<std::size_t>(stride())}; }
    std::span<const float> entry(std::size_t i) const {
        return {values_.data() + i * stride(), static_cast<std::size_t>(stride())};
    }
    float& coefficient(std::size_t i, int h, int c) { return values_[i * stride() + h * channels_ + c]; }
    float coefficient(std::size_t i, int h, int c) const { return values_[i * stride() + h * channels_ + c]; }
    float& density(std::size_t i) { return values_[i * stride() + coefficient_count()]; }
    float density(std::size_t i) const { return values_[i * stride() + coefficient_count()]; }

    std::span<float> data() { return values_; }
    std::span<const float> data() const { return values_; }

    /// Enforces sigma >= 0 on every entry.
    void clamp_densities();

    friend bool operator==(const Flut&, const Flut&) = default;

private:
    std::size_t entries_ = 0;
    int sh_degree_ = 0;
    int channels_ = 3;
    std::vector<float> values_;
};

}  // namespace nvo
