#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ltm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name. Domain errors are written to `err` as
// `error: <message>`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace ltm::cli
