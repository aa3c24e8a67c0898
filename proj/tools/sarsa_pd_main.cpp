#include <iostream>
#include <string>
#include <vector>

#include "sarsa_pd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return sarsa_pd::parse_and_dispatch(args, std::cout, std::cerr);
}
