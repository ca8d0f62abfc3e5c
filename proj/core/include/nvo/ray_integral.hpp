// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Emission-absorption integral over exact voxel segments and its analytic
// adjoint. Transmittance is exclusive: T_0 = 1, T_{i+1} = T_i exp(-sigma_i delta_i),
// a_i = T_i (1 - exp(-sigma_i delta_i)), F = sum_i a_i S_i, alpha = sum_i a_i.

#include "nvo/flut.hpp"
#include "nvo/sh.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nvo {

/// Read-only view over FLUT-shaped parameters of element type T.
template <typename T>
struct ParamTable {
    const T* data = nullptr;
    std::size_t stride = 0;
    int channels = 0;
    int basis_count = 0;

    const T* coefficients(std::uint32_t entry) const { return data + entry * stride; }
    T density(std::uint32_t entry) const { return data[entry * stride + basis_count * channels]; }
};

inline ParamTable<float> param_table(const Flut& flut) {
    return {flut.data().data(), static_cast<std::size_t>(flut.stride()), flut.channels(), flut.basis_count()};
}

/// One pierced voxel with its canonical-frame SH basis.
template <typename Real>
struct RayHit {
    std::uint32_t flut_index = 0;
    Real delta = 0;
    Real t_enter = 0;
    std::array<Real, kMaxShBasis> basis{};
};

/// S_c = sum_h k_{h,c} Y_h.
template <typename Real, typename T>
void shade(const ParamTable<T>& table, std::uint32_t entry, const Real* basis, Real* out) {
    const T* k = table.coefficients(entry);
    for (int c = 0; c < table.channels; ++c) {
        out[c] = 0;
    }
    for (int h = 0; h < table.basis_count; ++h) {
        const Real y = basis[h];
        for (int c = 0; c < table.channels; ++c) {
            out[c] += static_cast<Real>(k[h * table.channels + c]) * y;
        }
    }
}

template <typename Real>
struct RayAccumulator {
    std::array<Real, kMaxChannels> feature{};
    Real alpha = 0;
    Real transmittance = 1;

    /// Composites one segment; returns its weight a_i.
    Real add(Real sigma, Real delta, const Real* value, int channels) {
        const Real attenuation = std::exp(-sigma * delta);
        const Real weight = transmittance * (1 - attenuation);
        for (int c = 0; c < channels; ++c) {
            feature[c] += weight * value[c];
        }
        alpha += weight;
        transmittance *= attenuation;
        return weight;
    }
};

/// Forward pass over gathered hits. Stops after the first hit that pushes
/// alpha above stop_alpha (pass a value >= 1 to integrate everything).
template <typename Real, typename T>
RayAccumulator<Real> integrate_hits(std::span<const RayHit<Real>> hits, const ParamTable<T>& table,
                                    Real stop_alpha = Real(2)) {
    RayAccumulator<Real> acc;
    std::array<Real, kMaxChannels> value{};
    for (const RayHit<Real>& hit : hits) {
        shade(table, hit.flut_index, hit.basis.data(), value.data());
        const Real sigma = static_cast<Real>(table.density(hit.flut_index));
        acc.add(sigma, hit.delta, value.data(), table.channels);
        if (acc.alpha > stop_alpha) {
            break;
        }
    }
    return acc;
}

/// Adjoint of integrate_hits (no early stop) for upstream gradients
/// dL/dF (channels values) and dL/dalpha. For every hit calls
/// sink(hit_index, a_i, dL/dsigma_i); the coefficient gradient of that hit is
/// dL/dk_{h,c} = d_feature[c] * a_i * Y_h (see coefficient_gradient).
template <typename Real, typename T, typename Sink>
void backprop_hits(std::span<const RayHit<Real>> hits, const ParamTable<T>& table, const Real* d_feature,
                   Real d_alpha, Sink&& sink) {
    const std::size_t n = hits.size();
    if (n == 0) {
        return;
    }
    const int channels = table.channels;
    // Forward quantities; transmittance before each hit and final.
    struct Local {
        Real attenuation;
        Real transmittance;
        Real weight;
        std::array<Real, kMaxChannels> value;
    };
    // Small rays live on the stack; long ones fall back to the heap.
    constexpr std::size_t kInline = 64;
    std::array<Local, kInline> inline_storage;
    std::vector<Local> heap_storage;
    Local* local = inline_storage.data();
    if (n > kInline) {
        heap_storage.resize(n);
        local = heap_storage.data();
    }
    Real transmittance = 1;
    for (std::size_t i = 0; i < n; ++i) {
        Local& l = local[i];
        shade(table, hits[i].flut_index, hits[i].basis.data(), l.value.data());
        const Real sigma = static_cast<Real>(table.density(hits[i].flut_index));
        l.attenuation = std::exp(-sigma * hits[i].delta);
        l.transmittance = transmittance;
        l.weight = transmittance * (1 - l.attenuation);
        transmittance *= l.attenuation;
    }
    const Real final_transmittance = transmittance;
    std::array<Real, kMaxChannels> suffix{};
    for (std::size_t r = n; r-- > 0;) {
        const Local& l = local[r];
        const Real after = l.transmittance * l.attenuation;
        Real g = d_alpha * final_transmittance;
        for (int c = 0; c < channels; ++c) {
            g += d_feature[c] * (after * l.value[c] - suffix[c]);
        }
        sink(r, l.weight, hits[r].delta * g);
        for (int c = 0; c < channels; ++c) {
            suffix[c] += l.weight * l.value[c];
        }
    }
}

template <typename Real>
Real coefficient_gradient(const RayHit<Real>& hit, Real weight, const Real* d_feature, int h, int c) {
    return d_feature[c] * weight * hit.basis[h];
}

}  // namespace nvo
