#pragma once

namespace kinlab::expt {

/// Command-line entry point (kept in the library so tests can drive it
/// in-process). Returns 0 on pass, 2 when any applicable acceptance flag
/// fails, 1 on usage or config errors.
int cli_main(int argc, const char* const* argv);

}  // namespace kinlab::expt
