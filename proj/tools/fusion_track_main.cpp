#include <iostream>
#include <string>
#include <vector>

#include "fusion_track/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fusion_track::cli::main(args, std::cout, std::cerr);
}
