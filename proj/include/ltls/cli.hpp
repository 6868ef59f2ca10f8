#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ltls::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

// Runs the command line tool. args[0] is the program name. Errors are
// reported on `err` as one line "ltls: error[<category>]: <message>".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ltls::cli
