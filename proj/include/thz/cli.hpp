#pragma once

#include <string>
#include <vector>

namespace thz {

// CLI driver behind the thzrestore binary; also callable in-process.
// Exit codes: 0 ok, 1 io, 2 config, 3 degenerate data, 4 checkpoint
// mismatch, 5 shape mismatch.
int cli_run(const std::vector<std::string>& args);

}  // namespace thz
