#include <iostream>
#include <string>
#include <vector>

#include "odegrow/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return odegrow::cli::run(args, std::cout, std::cerr);
}
