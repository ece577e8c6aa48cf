#pragma once

namespace vdup::cli {

/// Parses arguments, runs one subcommand and returns the process exit code:
/// 0 success, 2 input error, 3 state error.
int run(int argc, char** argv);

}  // namespace vdup::cli
