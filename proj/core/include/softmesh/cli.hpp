#pragma once

namespace softmesh {

// Subcommand dispatcher for the softmesh binary. Exit codes: 0 success,
// 1 usage or configuration error, 2 runtime failure.
int run_cli(int argc, const char* const* argv);

}  // namespace softmesh
