#pragma once

#include <iosfwd>

namespace featnet {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitDivergence = 3,
    kExitInvariant = 4,
};

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace featnet
