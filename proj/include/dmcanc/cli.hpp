#pragma once

namespace dmcanc {

/// Entry point behind the dmcanc binary, callable from tests.
/// Exit codes: 0 success, 2 configuration/input error, 3 numerical abort.
int cli_main(int argc, const char* const* argv);

}  // namespace dmcanc
