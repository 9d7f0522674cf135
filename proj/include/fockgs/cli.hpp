// cli.hpp: the fockgs command line, callable in-process.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fockgs::cli {

enum ExitCode : int { ok = 0, check_failed = 2, config_error = 3, solver_failure = 4, usage_error = 64 };

// Report goes to `out` unless --out/[output] dir names a directory;
// diagnostics and the one-line summary go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

}  // namespace fockgs::cli
