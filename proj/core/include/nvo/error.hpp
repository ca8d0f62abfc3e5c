// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nvo {

/// Coarse error classes. The CLI prints these as machine-parsable prefixes.
enum class ErrorCategory {
    kUsage,
    kContract,
    kIo,
    kFormat,
    kCarvedEmpty,
    kOutOfBounds,
    kDiverged,
    kProtocol,
};

std::string_view category_name(ErrorCategory category);

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

/// Raised when a caller violates a documented precondition.
class ContractError : public Error {
public:
    explicit ContractError(const std::string& message)
        : Error(ErrorCategory::kContract, message) {}
};

/// Distinct failure kinds for binary/text asset decoding.
enum class FormatErrorKind {
    kTruncated,
    kBadMagic,
    kUnsupportedVersion,
    kCountMismatch,
    kTrailingData,
    kCorrupt,
    kSyntax,
};

std::string_view format_error_kind_name(FormatErrorKind kind);

class FormatError : public Error {
public:
    FormatError(FormatErrorKind kind, const std::string& message);

    FormatErrorKind kind() const { return kind_; }

private:
    FormatErrorKind kind_;
};

/// Carving removed every cell. Carries how many cells each view let through.
class CarvedEmptyError : public Error {
public:
    explicit CarvedEmptyError(std::vector<std::size_t> per_view_survivors);

    const std::vector<std::size_t>& per_view_survivors() const { return per_view_survivors_; }

private:
    std::vector<std::size_t> per_view_survivors_;
};

/// Optimization produced a non-finite loss.
class DivergedError : public Error {
public:
    DivergedError(std::size_t iteration, std::size_t ray);

    std::size_t iteration() const { return iteration_; }
    std::size_t ray() const { return ray_; }

private:
    std::size_t iteration_;
    std::size_t ray_;
};

}  // namespace nvo
