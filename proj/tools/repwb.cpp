#include <iostream>

#include "repwb/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return repwb::cli::run(args, std::cout, std::cerr);
}
