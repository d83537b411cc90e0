#pragma once

namespace autokg {

// Subcommands build, eval, bench and extract. Returns 0 on success, 1 on a
// usage error, 2 on a runtime error. Logs go to standard error.
int cli_main(int argc, char** argv);

}  // namespace autokg
