#include <iostream>

#include "idsnet_cli/cli.hpp"

int main(int argc, char** argv) {
  return idsnet::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
