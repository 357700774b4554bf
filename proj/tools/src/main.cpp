#include <iostream>
#include <string>
#include <vector>

#include "bisurv_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bisurv::cli::run(args, std::cin, std::cout, std::cerr);
}
