#pragma once

#include <string>
#include <vector>

namespace wcsafe {

/// Entry point behind the wcsafe binary. Subcommands: synthesize, sample,
/// train, eval, report. Returns a process exit status; all errors are
/// reported as human-readable messages on stderr.
int cli_main(const std::vector<std::string>& args);

}  // namespace wcsafe
