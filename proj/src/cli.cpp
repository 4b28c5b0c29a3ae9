// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#include "rdc/cli.hpp"

#include <cstdio>

namespace rdc {

int cli_main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::fprintf(stderr, "rdc: not wired up yet\n");
  return 1;
}

}  // namespace rdc
