#include <string>
#include <vector>

#include "clinev/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return clinev::run_cli(args);
}
