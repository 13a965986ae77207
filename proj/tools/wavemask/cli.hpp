#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace wavemask::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFormat = 3;
inline constexpr int kExitDomain = 4;

/// Runs one command line (arguments after the program name). Diagnostics go to `err`; `out` only carries
/// machine-readable output (currently just `version`).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// key=value lines written next to a train-demo checkpoint.
std::map<std::string, std::string> parse_config_text(const std::string& text);

}  // namespace wavemask::cli
