#include <iostream>
#include <string>
#include <vector>

#include "gwl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return gwl::cli::run(args, std::cout, std::cerr);
}
