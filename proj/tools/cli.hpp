#pragma once

#include <ostream>

namespace lassorec::cli {

// Exit codes of the lassorec binary.
enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitIo = 3 };

// Parses argv (argv[0] is the program name) and runs one subcommand.
// Reports go to `out` when no output directory is given; diagnostics go
// to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lassorec::cli
