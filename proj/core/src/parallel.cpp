// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/parallel.hpp"

#include <tbb/global_control.h>
#include <tbb/info.h>

#include <algorithm>

namespace nvo {

struct ThreadLimit::Impl {
    tbb::global_control control;
};

ThreadLimit::ThreadLimit(int threads)
    : impl_(std::make_unique<Impl>(Impl{tbb::global_control(tbb::global_control::max_allowed_parallelism,
                                                            static_cast<std::size_t>(std::max(1, threads)))})) {}

ThreadLimit::~ThreadLimit() = default;

int hardware_threads() { return std::max(1, tbb::info::default_concurrency()); }

}  // namespace nvo
