// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/sh.hpp"

#include "nvo/error.hpp"

#include <cmath>

namespace nvo {

ShBasis sh_basis(const Vec3& dir, int degree) {
    if (degree < 0 || degree > kMaxShDegree) {
        throw ContractError("SH degree must be in [0, 4]");
    }
    if (!(std::abs(dir.norm() - 1.0) <= 1e-6)) {
        throw ContractError("SH direction must be unit length");
    }
    ShBasis basis;
    basis.count = sh_basis_count(degree);
    eval_sh(dir.x(), dir.y(), dir.z(), degree, basis.values.data());
    return basis;
}

}  // namespace nvo
