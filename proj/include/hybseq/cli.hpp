#pragma once

#include <string>
#include <vector>

namespace hybseq {

/// Entry point behind the `hybseq` binary; argv without the program name.
/// Returns the process exit status (0 success, 1 domain error, 2 usage).
int cli_run(const std::vector<std::string>& args);

}  // namespace hybseq
