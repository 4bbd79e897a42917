#pragma once

/// @file  cli.hpp
/// @brief The `gembed` command line: gen, triplets, embed, eval, plot.

#include <iosfwd>

namespace gembed::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,
    kDataError = 2,
    kNumericError = 3,
    /// embed only: training stopped at max_epochs without reaching a plateau.
    kNotConverged = 4,
};

/// Runs one subcommand. Messages go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gembed::cli
