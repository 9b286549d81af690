#include <iostream>

#include "cli.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ave::cli::run(args, std::cout, std::cerr, ave::cli::process_env());
}
