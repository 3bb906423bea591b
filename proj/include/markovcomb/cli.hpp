#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcomb::cli {

// Runs one command. args excludes the program name. Results go to out as
// JSON, diagnostics to err. Exit codes: 0 success, 1 domain error (also
// reported on out as {"error": code, "detail": ...}), 2 usage or format error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcomb::cli
