// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "unitail/cli.hpp"

int main(int argc, char** argv) { return unitail::cli::run(argc, argv, std::cout, std::cerr); }
