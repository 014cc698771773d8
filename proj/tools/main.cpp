#include <iostream>
#include <string>
#include <vector>

#include "signbridge/pipeline/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return signbridge::pipeline::run_subcommand(args, std::cout, std::cerr);
}
