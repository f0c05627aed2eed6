#include <iostream>
#include <string>
#include <vector>

#include "adling/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return adling::cli::run(args, std::cout, std::cerr);
}
