#pragma once

#include <string>
#include <vector>

// Command-line front end.  Subcommands: bounds, ideal, ks-check, simulate,
// sweep-visibility, verify-apparatus, chsh.  Reports embed the resolved
// configuration and the published reference points; all numbers carry 12
// significant digits so seeded runs are byte-for-byte reproducible.
//
// Exit codes: 0 success, 1 invalid input, 2 internal consistency failure.

namespace contextsim::cli {

int run(int argc, const char* const* argv);

// Convenience for tests: `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace contextsim::cli
