//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <iostream>

#include "commands.h"

int main(int argc, char **argv) {
  return solvflow::cli::run(argc, argv, std::cout, std::cerr);
}
