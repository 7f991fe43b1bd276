#include <iostream>
#include <string>
#include <vector>

#include "ratt/app/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ratt::run_cli(args, std::cout, std::cerr);
}
