#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace quis {

// Exit codes: 0 success, 1 usage error, 2 data or validation error.
// `args` excludes the program name.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace quis
