#pragma once

// Command line entry point, kept in the library so tests can drive the
// tool in-process. Subcommands: simulate, run, ingest, plot, schema.
// Exit codes: 0 success, 2 validation error, 3 runtime/solver failures.

namespace slammot {

int cli_main(int argc, const char* const* argv);

}  // namespace slammot
