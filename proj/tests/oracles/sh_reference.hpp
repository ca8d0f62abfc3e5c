// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Real SH from associated Legendre functions in spherical coordinates.
// std::assoc_legendre omits the Condon-Shortley phase, matching the
// Cartesian forms without it.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

inline double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) {
        f *= k;
    }
    return f;
}

inline std::vector<double> real_sh(double x, double y, double z, int degree) {
    const double theta = std::acos(std::clamp(z, -1.0, 1.0));
    const double phi = std::atan2(y, x);
    std::vector<double> out((degree + 1) * (degree + 1));
    for (int l = 0; l <= degree; ++l) {
        for (int m = -l; m <= l; ++m) {
            const int am = std::abs(m);
            const double k = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * factorial(l - am) / factorial(l + am));
            const double p = std::assoc_legendre(l, am, std::cos(theta));
            double v;
            if (m > 0) {
                v = std::sqrt(2.0) * k * std::cos(m * phi) * p;
            } else if (m < 0) {
                v = std::sqrt(2.0) * k * std::sin(am * phi) * p;
            } else {
                v = k * p;
            }
            out[l * l + l + m] = v;
        }
    }
    return out;
}

}  // namespace oracle
