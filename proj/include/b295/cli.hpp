#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace b295::cli {

/// Runs one subcommand (tf, sweep, calibrate, table1, sum). `args` excludes
/// the program name. Returns 0 on success, 2 for flag errors and 1 for
/// computation errors; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace b295::cli
