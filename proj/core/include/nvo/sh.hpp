// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/geometry.hpp"

#include <array>
#include <cmath>
#include <span>

namespace nvo {

inline constexpr int kMaxShDegree = 4;
inline constexpr int kMaxShBasis = (kMaxShDegree + 1) * (kMaxShDegree + 1);

constexpr int sh_basis_count(int degree) { return (degree + 1) * (degree + 1); }

/// Real spherical-harmonics basis values at one direction, ordered by
/// h = l*l + l + m.
struct ShBasis {
    std::array<double, kMaxShBasis> values{};
    int count = 0;

    std::span<const double> span() const { return {values.data(), static_cast<std::size_t>(count)}; }
    double operator[](int h) const { return values[h]; }
};

/// Real SH basis in Cartesian-polynomial form (no Condon-Shortley phase).
/// Throws ContractError if |dir| differs from 1 by more than 1e-6 or the
/// degree is outside [0, 4].
ShBasis sh_basis(const Vec3& dir, int degree);


/// Unchecked evaluation for hot loops. `out` must hold (degree+1)^2 values.
template <typename Real>
void eval_sh(Real x, Real y, Real z, int degree, Real* out) {
    constexpr double pi = std::numbers::pi;
    static const Real c00 = static_cast<Real>(0.5 * std::sqrt(1.0 / pi));
    static const Real c1 = static_cast<Real>(std::sqrt(3.0 / (4.0 * pi)));
    static const Real c2a = static_cast<Real>(0.5 * std::sqrt(15.0 / pi));
    static const Real c2b = static_cast<Real>(0.25 * std::sqrt(5.0 / pi));
    static const Real c2c = static_cast<Real>(0.25 * std::sqrt(15.0 / pi));
    static const Real c3a = static_cast<Real>(0.25 * std::sqrt(35.0 / (2.0 * pi)));
    static const Real c3b = static_cast<Real>(0.5 * std::sqrt(105.0 / pi));
    static const Real c3c = static_cast<Real>(0.25 * std::sqrt(21.0 / (2.0 * pi)));
    static const Real c3d = static_cast<Real>(0.25 * std::sqrt(7.0 / pi));
    static const Real c3e = static_cast<Real>(0.25 * std::sqrt(105.0 / pi));
    static const Real c4a = static_cast<Real>(0.75 * std::sqrt(35.0 / pi));
    static const Real c4b = static_cast<Real>(0.75 * std::sqrt(35.0 / (2.0 * pi)));
    static const Real c4c = static_cast<Real>(0.75 * std::sqrt(5.0 / pi));
    static const Real c4d = static_cast<Real>(0.75 * std::sqrt(5.0 / (2.0 * pi)));
    static const Real c4e = static_cast<Real>(3.0 / 16.0 * std::sqrt(1.0 / pi));
    static const Real c4f = static_cast<Real>(3.0 / 8.0 * std::sqrt(5.0 / pi));
    static const Real c4g = static_cast<Real>(3.0 / 16.0 * std::sqrt(35.0 / pi));

    out[0] = c00;
    if (degree < 1) return;
    out[1] = c1 * y;
    out[2] = c1 * z;
    out[3] = c1 * x;
    if (degree < 2) return;
    const Real xx = x * x, yy = y * y, zz = z * z;
    out[4] = c2a * x * y;
    out[5] = c2a * y * z;
    out[6] = c2b * (3 * zz - 1);
    out[7] = c2a * x * z;
    out[8] = c2c * (xx - yy);
    if (degree < 3) return;
    out[9] = c3a * y * (3 * xx - yy);
    out[10] = c3b * x * y * z;
    out[11] = c3c * y * (5 * zz - 1);
    out[12] = c3d * z * (5 * zz - 3);
    out[13] = c3c * x * (5 * zz - 1);
    out[14] = c3e * z * (xx - yy);
    out[15] = c3a * x * (xx - 3 * yy);
    if (degree < 4) return;
    out[16] = c4a * x * y * (xx - yy);
    out[17] = c4b * y * z * (3 * xx - yy);
    out[18] = c4c * x * y * (7 * zz - 1);
    out[19] = c4d * y * z * (7 * zz - 3);
    out[20] = c4e * (35 * zz * zz - 30 * zz + 3);
    out[21] = c4d * x * z * (7 * zz - 3);
    out[22] = c4f * (xx - yy) * (7 * zz - 1);
    out[23] = c4b * x * z * (xx - 3 * yy);
    out[24] = c4g * (xx * (xx - 3 * yy) - yy * (3 * xx - yy));
}

}  // namespace nvo
