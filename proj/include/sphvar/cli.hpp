#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sphvar {

/// Exit codes: 0 success, 1 a numerical check did not pass, 2 bad usage.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sphvar
