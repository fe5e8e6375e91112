#include <string>
#include <vector>

#include "gjra/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gjra::cli::run(args);
}
