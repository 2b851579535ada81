#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace corrbound {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitFlagError = 2;

/// Entry point of the `corrbound` tool. `args` excludes the program name.
/// Diagnostics go to `err`; failures print one JSON line
/// {"error": <code>, "message": <text>}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace corrbound
