#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "adling/cli/run_config.hpp"

namespace adling::cli {

const std::vector<std::string>& command_names();

/// Runs one command against a fully assembled config. Throws adling::Error.
void dispatch(const std::string& command, RunConfig config, std::ostream& out);

/// Full entry point: `args[0]` is the command, the rest are flags.
/// Returns 0 on success, 1 for usage or configuration errors, 2 for data or
/// format errors, 3 for numeric failures; failures print one line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adling::cli
