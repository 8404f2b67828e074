#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scenarioforge::cli {

/// Entry point of the `scenarioforge` command. Returns the process exit code:
/// 0 when every verdict is Pass and nothing failed, 1 for failing tests or
/// invalid projects, 2 for usage, I/O and format errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scenarioforge::cli
