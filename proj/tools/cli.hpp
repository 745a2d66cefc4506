#ifndef SIGVAR_TOOLS_CLI_HPP
#define SIGVAR_TOOLS_CLI_HPP

#include <string>
#include <vector>

namespace sigvar::cli {

/// Runs the command line. Returns the process exit code: 0 success,
/// 2 configuration error, 3 data error, 4 numerical failure.
int run(const std::vector<std::string> &args);

/// Parses "1..3", "0,5,10" or "7" into an ascending list.
std::vector<int> parse_int_list(const std::string &text);

/// Parses "start:stop:step" into grid points start + k * step up to stop.
std::vector<double> parse_grid(const std::string &text);

} // namespace sigvar::cli

#endif // SIGVAR_TOOLS_CLI_HPP
