#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mevdro::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitSolverFlag = 2;

/// Runs one command line (without the program name). Data goes to `out`
/// unless redirected by --out; summaries, logs and errors go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mevdro::cli
