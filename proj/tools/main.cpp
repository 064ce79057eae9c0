#include <csignal>
#include <iostream>
#include <string>
#include <vector>

#include "app.hpp"

namespace {
extern "C" void on_interrupt(int) { lunarmap::app::interrupt_flag().store(true); }
}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  std::vector<std::string> args(argv, argv + argc);
  return lunarmap::app::run(args, std::cout, std::cerr);
}
