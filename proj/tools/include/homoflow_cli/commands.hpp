#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace homoflow::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kBadInput = 2, kQualityGate = 3 };

// Parses and runs one subcommand. Output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace homoflow::cli
