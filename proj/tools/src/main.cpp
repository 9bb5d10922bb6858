#include <iostream>
#include <string>
#include <vector>

#include "netfx_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return netfx::cli::run(args, std::cout, std::cerr);
}
