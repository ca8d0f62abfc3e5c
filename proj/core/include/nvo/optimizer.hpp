// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nvo {

/// Dense gradient congruent to a FLUT plus the list of entries touched by
/// the current batch. Untouched entries stay exactly zero.
class GradBuffer {
public:
    GradBuffer() = default;
    GradBuffer(std::size_t entries, int stride);

    std::size_t entries() const { return entries_; }
    int stride() const { return stride_; }

    /// Marks the entry touched and returns its gradient block.
    std::span<double> touch(std::uint32_t entry);
    std::span<const double> block(std::uint32_t entry) const {
        return {values_.data() + static_cast<std::size_t>(entry) * stride_, static_cast<std::size_t>(stride_)};
    }
    bool touched(std::uint32_t entry) const { return flags_[entry] != 0; }
    /// Touched entries in first-touch order.
    std::span<const std::uint32_t> touched_entries() const { return touched_; }

    /// Zeroes touched blocks and forgets them.
    void clear();

private:
    std::size_t entries_ = 0;
    int stride_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> flags_;
    std::vector<std::uint32_t> touched_;
};

struct AdamConfig {
    double learning_rate = 0.02;
    /// Separate rate for the density slot (inverse world units).
    double density_learning_rate = 1.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adaptive-moment optimizer with lazy (touched-only) updates over a
/// float parameter array laid out like the gradient buffer. The last slot
/// of each block is a density and is clamped at zero after each step.
class SparseAdam {
public:
    SparseAdam(std::size_t entries, int stride, AdamConfig config);

    const AdamConfig& config() const { return config_; }
    std::size_t step_count() const { return step_; }

    void step(std::span<float> params, const GradBuffer& grad);

private:
    AdamConfig config_;
    int stride_;
    std::size_t step_ = 0;
    std::vector<double> first_;
    std::vector<double> second_;
    /// Per-entry update count, used for bias correction.
    std::vector<std::uint32_t> updates_;
};

}  // namespace nvo
