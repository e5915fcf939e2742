#include <iostream>

#include "conch/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return conch::cli::run(std::move(args), std::cout, std::cerr);
}
