#ifndef XLTAG_TOOLS_COMMANDS_H_
#define XLTAG_TOOLS_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

namespace xltag::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitDivergence = 3;

// Runs one subcommand; |args| excludes the program name. Progress goes to
// |out| and error messages to |err|.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);
int run_cli(int argc, char **argv);

}  // namespace xltag::cli

#endif  // XLTAG_TOOLS_COMMANDS_H_
