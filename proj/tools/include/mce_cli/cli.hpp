#pragma once

#include <iosfwd>

namespace mce::cli {

/// Entry point of the `mce` tool with injectable streams.
/// Returns 0 on success, 1 on configuration errors and 2 on solver failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mce::cli
