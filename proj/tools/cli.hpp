#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cskit::cli {

// Runs one command line (args exclude the program name). Returns the exit
// code: 0 success, 1 runtime error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cskit::cli
