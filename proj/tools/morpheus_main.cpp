// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#include <iostream>

#include "morpheus/cli/app.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  const std::vector<std::string> args(argv + 1, argv + argc);
  return morpheus::cli::run_cli(args, std::cin, std::cout, std::cerr);
}
