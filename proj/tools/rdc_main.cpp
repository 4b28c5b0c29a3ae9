// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#include "rdc/cli.hpp"

int main(int argc, char** argv) { return rdc::cli_main(argc, argv); }
