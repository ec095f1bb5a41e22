#pragma once

#include <iosfwd>

namespace mlrem {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitIo = 3,
    kExitNumerical = 4,
};

/// Entry point of the `mlrem` command line tool:
///   mlrem [--jobs N] [--seed-override S] [--out PATH] gen|run|sweep|report ...
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mlrem
