#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace csfbench::cli {

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 on success, 1 on usage errors, 2 on runtime or data errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace csfbench::cli
