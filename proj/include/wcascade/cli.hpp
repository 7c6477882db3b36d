#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wcascade {

// Exit status contract of the command-line tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_invalid_input = 2,
    exit_io = 3,
    exit_analysis = 4,
};

// Runs the command-line tool. args excludes the program name. Diagnostics go to
// err, help and short reports to out.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wcascade
