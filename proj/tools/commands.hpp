#ifndef N3POM_TOOLS_COMMANDS_HPP
#define N3POM_TOOLS_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace n3pom::cli {

enum ExitCode : int { kOk = 0, kIoError = 1, kConfigError = 2, kNumericError = 3 };

/// Parses and runs one subcommand. args excludes the program name.
/// Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace n3pom::cli

#endif  // N3POM_TOOLS_COMMANDS_HPP
