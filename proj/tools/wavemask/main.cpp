#include <iostream>
#include <string>
#include <vector>

#include "wavemask/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return wavemask::cli::run(args, std::cout, std::cerr);
}
