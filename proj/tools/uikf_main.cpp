#include <iostream>
#include <string>
#include <vector>

#include "uikf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return uikf::runCli(args, std::cout, std::cerr);
}
