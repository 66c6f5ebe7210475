#include <iostream>
#include <string>
#include <vector>

#include "evtrace/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return evtrace::cli::run(args, std::cerr);
}
