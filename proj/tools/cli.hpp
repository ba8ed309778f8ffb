#pragma once

namespace laprep::cli {

/// Runs the laprep command line. Returns 0 on success, 2 for a bad
/// configuration and 1 for a failure while running. Errors are reported as a
/// single `error code=<Code> message="..."` line on stderr.
int run(int argc, const char* const* argv);

}  // namespace laprep::cli
