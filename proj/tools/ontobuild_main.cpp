#include <iostream>

#include "ontobuild/cli.hpp"

int main(int argc, char** argv) {
  return ontobuild::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
