#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scrkit {

enum ExitStatus : int {
    kExitSuccess = 0,
    kExitUsage = 1,
    kExitInput = 2,        // parse, validation and parameter errors
    kExitComputation = 3,  // instability, non-convergence, no resonance
};

/// Runs one scrkit command line (args excludes the program name).
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scrkit
