// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/optimizer.hpp"

#include "nvo/error.hpp"

#include <algorithm>
#include <cmath>

namespace nvo {

GradBuffer::GradBuffer(std::size_t entries, int stride)
    : entries_(entries), stride_(stride), values_(entries * stride, 0.0), flags_(entries, 0) {}

std::span<double> GradBuffer::touch(std::uint32_t entry) {
    if (!flags_[entry]) {
        flags_[entry] = 1;
        touched_.push_back(entry);
    }
    return {values_.data() + static_cast<std::size_t>(entry) * stride_, static_cast<std::size_t>(stride_)};
}

void GradBuffer::clear() {
    for (const std::uint32_t entry : touched_) {
        std::fill_n(values_.begin() + static_cast<std::ptrdiff_t>(entry) * stride_, stride_, 0.0);
        flags_[entry] = 0;
    }
    touched_.clear();
}

SparseAdam::SparseAdam(std::size_t entries, int stride, AdamConfig config)
    : config_(config),
      stride_(stride),
      first_(entries * stride, 0.0),
      second_(entries * stride, 0.0),
      updates_(entries, 0) {
    if (!(config.learning_rate > 0.0) || !(config.density_learning_rate > 0.0) || !(config.beta1 >= 0.0) ||
        !(config.beta1 < 1.0) || !(config.beta2 >= 0.0) || !(config.beta2 < 1.0) || !(config.epsilon > 0.0)) {
        throw ContractError("invalid optimizer configuration");
    }
}

void SparseAdam::step(std::span<float> params, const GradBuffer& grad) {
    if (grad.stride() != stride_ || params.size() != first_.size()) {
        throw ContractError("optimizer state does not match the parameter layout");
    }
    ++step_;
    for (const std::uint32_t entry : grad.touched_entries()) {
        const std::uint32_t t = ++updates_[entry];
        const double correction1 = 1.0 - std::pow(config_.beta1, t);
        const double correction2 = 1.0 - std::pow(config_.beta2, t);
        const auto g = grad.block(entry);
        const std::size_t base = static_cast<std::size_t>(entry) * stride_;
        for (int s = 0; s < stride_; ++s) {
            const std::size_t k = base + s;
            if (g[s] == 0.0 && first_[k] == 0.0 && second_[k] == 0.0) {
                continue;
            }
            first_[k] = config_.beta1 * first_[k] + (1.0 - config_.beta1) * g[s];
            second_[k] = config_.beta2 * second_[k] + (1.0 - config_.beta2) * g[s] * g[s];
            const double m_hat = first_[k] / correction1;
            const double v_hat = second_[k] / correction2;
            const double lr = s == stride_ - 1 ? config_.density_learning_rate : config_.learning_rate;
            params[k] = static_cast<float>(params[k] - lr * m_hat / (std::sqrt(v_hat) + config_.epsilon));
        }
        float& density = params[base + stride_ - 1];
        density = std::max(density, 0.0f);
    }
}

}  // namespace nvo
