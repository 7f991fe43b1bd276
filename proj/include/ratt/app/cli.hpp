#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ratt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `ratt` tool: ingest, run, replay and eval. `args`
/// excludes the program name. `getenv` is injectable for tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::function<const char*(const char*)>& getenv = {});

}  // namespace ratt
