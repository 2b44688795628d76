#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace atagan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;  // bad flags, config or input files
inline constexpr int kExitFailed = 2;   // NaN abort or I/O failure at run time

/// Runs one `atagan` command; `args` excludes the program name. Normal output
/// goes to `out`, the one-line diagnostic of a failure to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace atagan::cli
