#include <iostream>

#include "autoform/cli/commands.hpp"

int main(int argc, char** argv) {
  return autoform::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
