#include <iostream>
#include <string>
#include <vector>

#include "kidex/pipeline.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kidex::pipeline::run_cli(args, std::cout, std::cerr);
}
