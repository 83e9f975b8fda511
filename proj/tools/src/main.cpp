#include <iostream>
#include <string>
#include <vector>

#include "pnpbif_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pnpbif::cli::run(args, std::cout, std::cerr);
}
