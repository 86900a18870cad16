#pragma once

// Command-line front end. Every subcommand wraps one library operation and
// writes versioned JSONL records.

#include <iosfwd>
#include <string>
#include <vector>

namespace damo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitRuntime = 3;

/// Parses argv (argv[0] is the program name) and runs one subcommand.
/// Returns the process exit code; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace damo::cli
