#include <iostream>
#include <string>
#include <vector>

#include "armsynth/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return armsynth::run_cli(args, std::cout, std::cerr);
}
