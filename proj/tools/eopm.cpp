#include <iostream>
#include <string>
#include <vector>

#include "eopm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return eopm::cli::run(args, std::cout, std::cerr);
}
