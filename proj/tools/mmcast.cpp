#include <iostream>

#include "mmcast/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mmcast::cli::run(args, std::cout, std::cerr);
}
