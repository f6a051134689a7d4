#include <iostream>
#include <string>
#include <vector>

#include "servosys/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return servosys::run_cli(args, std::cout, std::cerr);
}
