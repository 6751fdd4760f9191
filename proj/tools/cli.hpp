#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace subsum::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kNo = 1;        // a verified violation or a "no" answer
inline constexpr int kUsage = 2;     // usage or parse error
inline constexpr int kInternal = 3;  // a proof-guaranteed step failed

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace subsum::cli
