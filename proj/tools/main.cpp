// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "u8stream/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return u8stream::cli::run(argc, argv, std::cin, std::cout, std::cerr);
}
