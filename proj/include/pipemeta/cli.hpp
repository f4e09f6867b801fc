// The `pipemeta` command-line interface.

#ifndef PIPEMETA_CLI_HPP_
#define PIPEMETA_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace pipemeta {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on a runtime failure (missing input, bad data) and 2 on a
/// usage error.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Applies `--config FILE`: every `key=value` line becomes `--key=value`
/// unless the flag already appears in `args`. Blank lines and lines starting
/// with '#' are ignored. Throws std::runtime_error if the file is unreadable
/// or a line has no '='.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace pipemeta

#endif  // PIPEMETA_CLI_HPP_
