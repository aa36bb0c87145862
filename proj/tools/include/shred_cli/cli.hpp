#pragma once

#include <iosfwd>

namespace shred::cli {

/// Entry point shared by the `shred` binary and the tests. Returns the
/// process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shred::cli
