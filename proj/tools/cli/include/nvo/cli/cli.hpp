// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nvo::cli {

/// Runs one command line (args excludes the program name). Errors are
/// reported on `err` as a single "error: <category>: <message>" line.
/// Returns 0 on success, 2 on usage errors and 1 otherwise.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Median of the values (mean of the middle two for even counts).
double median(std::vector<double> values);

}  // namespace nvo::cli
