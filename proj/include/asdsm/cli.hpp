#pragma once

namespace asdsm {

// Entry point behind the asdsm executable; split out so tests can drive the
// full argument-parsing and exit-code paths in process.
// Exit codes: 0 success, 1 failed verification check, 2 configuration error,
// 3 numerical failure (singular block).
int cli_main(int argc, const char* const* argv);

}  // namespace asdsm
