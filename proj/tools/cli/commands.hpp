#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedsim::cli {

// Entry point used by the fedsim binary and by the tests; argv follows the
// usual conventions (argv[0] is the program name). Returns the process exit
// code: 0 only when all requested work completed.
int run_cli(int argc, const char* const* argv);

int run_cli(const std::vector<std::string>& args);

// "1..10" or "3,5,8" -> list of seeds.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace fedsim::cli
