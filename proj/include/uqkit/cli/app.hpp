#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uqkit::cli {

enum ExitCode : int { ok = 0, internal_error = 1, bad_usage = 2, bad_data = 3, diverged = 4 };

/// Runs one command. `args` excludes the program name. The report goes to `out`,
/// logs and errors to `err`. The log level is read from UQKIT_LOG_LEVEL
/// (error, warn, info or debug; default warn).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace uqkit::cli
