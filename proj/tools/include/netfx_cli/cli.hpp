#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace netfx::cli {

/// Exit codes: 0 ok, 1 I/O, parse or usage error, 2 statistical or
/// identifiability error (also raised by `diagnose` when a flag is set).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace netfx::cli
