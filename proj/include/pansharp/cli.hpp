#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pansharp {

/// Entry point of the `pansharp` tool. `args` excludes the program name.
/// Returns 0 on success, 1 on processing errors and 2 on argument errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace pansharp
