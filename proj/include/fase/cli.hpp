#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fase {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitIo = 2 };

// Entry point behind the fase_sim binary. `args` excludes the program name.
// Subcommands: simulate, attack, compare.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fase
