#pragma once

#include <atomic>
#include <iosfwd>
#include <string>
#include <vector>

namespace lunarmap::app {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kInterrupted = 3,
  kInternalError = 4,
};

/// Set by the SIGINT handler; sweeps stop at the next checkpoint.
std::atomic<bool>& interrupt_flag();

/// Runs one command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lunarmap::app
