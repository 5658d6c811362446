#pragma once

#include <iosfwd>

namespace factlink::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kAssertFailed = 3 };

/// Runs one command line. Results go to `out`; diagnostics to `err`, each
/// prefixed with "error: " or "warning: ".
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace factlink::cli
