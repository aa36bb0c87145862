#include <iostream>

#include "shred_cli/cli.hpp"

int main(int argc, char** argv) {
  return shred::cli::run(argc, argv, std::cout, std::cerr);
}
