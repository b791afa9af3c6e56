#include <iostream>

#include "rectpcp/cli.hpp"

int main(int argc, char** argv) {
  return rectpcp::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
