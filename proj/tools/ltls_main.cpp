#include <iostream>
#include <string>
#include <vector>

#include "ltls/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ltls::cli::run(args, std::cout, std::cerr);
}
