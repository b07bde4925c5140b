#pragma once

#include <iosfwd>

namespace moments {

/// Entry point of the `moments` tool. Diagnostics go to `err`; returns the
/// process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace moments
