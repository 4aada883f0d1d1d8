#pragma once

#include <iosfwd>

namespace doblab::cli {

/// Runs the doblab command line; CSV/report output on `out`, diagnostics on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace doblab::cli
