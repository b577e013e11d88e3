#pragma once

// Command-line entry point, separated from main() so tests can drive the
// subcommands in-process. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 numeric failure.
int cli_main(int argc, const char* const* argv);
