#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace ave::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitPartial = 2;  // some inputs failed, the rest were committed

/// Entry point shared by main() and the tests. args excludes the program
/// name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::map<std::string, std::string>& env);

}  // namespace ave::cli
