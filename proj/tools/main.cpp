#include <string>
#include <vector>

#include "bpsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bpsim::run_command(args);
}
