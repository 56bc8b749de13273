#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace affthermo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitPrecondition = 2;  ///< also usage and parse errors
inline constexpr int kExitBudget = 3;

/// Runs one subcommand; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace affthermo::cli
