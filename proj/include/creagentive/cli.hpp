#pragma once

// Command-line surface: init | generate | write | evaluate | export | inspect
// over a run directory. Returns the process exit code (0 success, 2 usage,
// 1 with a single "error: <CodeName>: <message>" line otherwise).

namespace creagentive {

int run_cli(int argc, const char* const* argv);

}  // namespace creagentive
