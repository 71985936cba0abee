// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace lat::cli {

/// Full command-line entry point (args exclude the program name).
/// Returns the process exit code: 0 on success, 2 on validation or I/O
/// failures, CLI11's code on flag parse errors.
int run(const std::vector<std::string>& args);

}  // namespace lat::cli
