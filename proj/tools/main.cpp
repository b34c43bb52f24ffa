#include <string>
#include <vector>

#include "proxal/harness.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return proxal::run_cli(args);
}
