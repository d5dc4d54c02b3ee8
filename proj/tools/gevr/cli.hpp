#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gevr::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

/// Runs the gevr command line. `args` excludes the program name. Diagnostics
/// go to `err`; outputs without --out go to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gevr::cli
