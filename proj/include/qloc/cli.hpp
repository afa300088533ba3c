#pragma once

#include <ostream>

namespace qloc {

/// Exit codes: 0 every verdict passes, 1 some verdict fails, 2 bad input.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace qloc
