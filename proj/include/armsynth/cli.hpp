#ifndef ARMSYNTH_CLI_HPP
#define ARMSYNTH_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace armsynth {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitExhausted = 2;

/// Runs the `armsynth` command line with the given arguments (argv[0]
/// excluded), writing to `out` and `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace armsynth

#endif  // ARMSYNTH_CLI_HPP
