// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return nvo::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
