#pragma once

namespace fplab {

// Command-line entry point; returns the process exit code.
// 0: success (run-verify also requires every check to pass)
// 1: run-verify completed with failing checks
// 2: malformed scenario, bad arguments, or invalid run setup
// 3: unknown model or check name
// 4: solver failure (non-convergence, stalled linear solve, degenerate
//    particle density); details land in <out>/error.json
int run_cli(int argc, const char* const* argv);

}  // namespace fplab
