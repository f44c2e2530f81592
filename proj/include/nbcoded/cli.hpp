#ifndef NBCODED_CLI_HPP
#define NBCODED_CLI_HPP

#include <ostream>
#include <span>
#include <string>

namespace nbcoded::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kTrainingError = 3 };

/// Runs one `nbcoded` command. `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream &out, std::ostream &err);

} // namespace nbcoded::cli

#endif
