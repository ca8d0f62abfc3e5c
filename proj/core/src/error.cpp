// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/error.hpp"

#include <fmt/format.h>

namespace nvo {

std::string_view category_name(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::kUsage: return "usage";
        case ErrorCategory::kContract: return "contract";
        case ErrorCategory::kIo: return "io";
        case ErrorCategory::kFormat: return "format";
        case ErrorCategory::kCarvedEmpty: return "carved-empty";
        case ErrorCategory::kOutOfBounds: return "out-of-bounds";
        case ErrorCategory::kDiverged: return "diverged";
        case ErrorCategory::kProtocol: return "protocol";
    }
    return "unknown";
}

std::string_view format_error_kind_name(FormatErrorKind kind) {
    switch (kind) {
        case FormatErrorKind::kTruncated: return "truncated";
        case FormatErrorKind::kBadMagic: return "bad-magic";
        case FormatErrorKind::kUnsupportedVersion: return "unsupported-version";
        case FormatErrorKind::kCountMismatch: return "count-mismatch";
        case FormatErrorKind::kTrailingData: return "trailing-data";
        case FormatErrorKind::kCorrupt: return "corrupt";
        case FormatErrorKind::kSyntax: return "syntax";
    }
    return "unknown";
}

FormatError::FormatError(FormatErrorKind kind, const std::string& message)
    : Error(ErrorCategory::kFormat, fmt::format("{}: {}", format_error_kind_name(kind), message)), kind_(kind) {}

namespace {

std::string carved_empty_message(const std::vector<std::size_t>& counts) {
    std::string list;
    for (std::size_t v = 0; v < counts.size(); ++v) {
        list += fmt::format("{}{}", v == 0 ? "" : ",", counts[v]);
    }
    return fmt::format("no cell survived carving; per-view survivors [{}]", list);
}

}  // namespace

CarvedEmptyError::CarvedEmptyError(std::vector<std::size_t> per_view_survivors)
    : Error(ErrorCategory::kCarvedEmpty, carved_empty_message(per_view_survivors)),
      per_view_survivors_(std::move(per_view_survivors)) {}

DivergedError::DivergedError(std::size_t iteration, std::size_t ray)
    : Error(ErrorCategory::kDiverged, fmt::format("non-finite loss at iteration {} (ray {})", iteration, ray)),
      iteration_(iteration),
      ray_(ray) {}

}  // namespace nvo
