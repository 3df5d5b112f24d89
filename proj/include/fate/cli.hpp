#pragma once

#include "fate/errors.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fate::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kEstimationError = 3 };

/// Exit code a library error maps to.
int exit_code(ErrorKind kind);

/// Runs one command line (args excludes the program name). Reports go to
/// `out`, diagnostics to `err` as "error[<Kind>]: <message>".
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fate::cli
