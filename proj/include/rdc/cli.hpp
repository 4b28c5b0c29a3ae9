// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RDC_CLI_HPP_
#define RDC_CLI_HPP_

namespace rdc {

// Entry point for the rdc command-line tool (train / compress / decompress /
// eval / rdcurve / video-enhance). Returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace rdc

#endif  // RDC_CLI_HPP_
