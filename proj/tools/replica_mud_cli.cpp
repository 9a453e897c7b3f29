#include <iostream>
#include <string>
#include <vector>

#include "replica_mud/sweep.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rmud::run_cli(args, std::cout, std::cerr);
}
