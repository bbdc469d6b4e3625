#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace occur::app {

/// Entry point shared by the `occur` binary and the CLI tests. Returns the
/// process exit code; 0 only when every requested output was written.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "3" -> {3}; "1..5" -> {1, 2, 3, 4, 5}.
std::vector<std::uint64_t> parse_seed_range(const std::string& text);

}  // namespace occur::app
