#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rmpc {

/// Command-line front end (verbs: run, reproduce-paper,
/// validate-config). Returns the process exit code: 0 success, 1
/// run/property failure, 2 usage or configuration error. Factored out of
/// main() so tests can drive it in-process.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rmpc
