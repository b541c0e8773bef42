#pragma once

namespace lbm {

/// Exit codes: 0 success, 1 failure, 2 missing capability.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitCapability = 2;

/// Entry point of the `lbmbench` tool: probe, run, sweep, report, validate.
int cli_main(int argc, char** argv);

}  // namespace lbm
