#include <iostream>
#include <string>
#include <vector>

#include "chopper/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return chopper::cli_main(args, std::cout, std::cerr);
}
