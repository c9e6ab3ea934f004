#include <iostream>
#include <string>
#include <vector>

#include "vilab/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return vilab::run_cli(args, std::cout, std::cerr);
}
