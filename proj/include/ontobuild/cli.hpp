#pragma once

// Command-line front end. Every stage reads its inputs from the config and
// from earlier artifacts in output_dir, writes its own artifacts atomically
// and leaves a <stage>_report.json next to them.

#include <iosfwd>
#include <string>
#include <vector>

namespace ontobuild::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // violations or runtime errors
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ontobuild::cli
