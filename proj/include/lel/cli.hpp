#pragma once

namespace lel {

// Entry point of the lel command-line tool; returns the process exit code
// (0 ok, 1 data error, 2 parameter error, 3 numerical error).
int run_cli(int argc, const char* const* argv);

}  // namespace lel
