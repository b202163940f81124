#include <iostream>

#include "mtest/cli.hpp"

int main(int argc, char** argv) {
  return mtest::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
