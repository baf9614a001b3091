#pragma once

#include <ostream>
#include <span>
#include <string>

namespace capflow {

/// Command-line entry point; args excludes the program name.
///
/// Exit codes: 0 success, 1 invalid input (every error kind except
/// SolverFailure), 2 solver failure. Errors go to `err` as
/// "error: <Kind>: <message>". Reports go to --out when given, else to `out`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace capflow
