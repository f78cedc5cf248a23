#pragma once

#include <string>
#include <vector>

namespace wst::cli {

/// Dispatches one subcommand invocation (argv without the program name).
/// Returns the process exit code: 0 success, 2 flag/config errors,
/// 3 data errors, 4 model failures.
int run(const std::vector<std::string>& args);

} // namespace wst::cli
