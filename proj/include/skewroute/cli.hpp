#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "skewroute/router.hpp"

namespace skewroute::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitInternal = 3,
};

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One line of decisions.jsonl (no trailing newline):
/// {"id":...,"arm":...,"difficulty":...,"metric":...}
std::string decision_line(std::string_view id, std::string_view arm, double difficulty, std::string_view metric);

}  // namespace skewroute::cli
