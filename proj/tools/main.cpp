#include <string>
#include <vector>

#include "hybseq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hybseq::cli_run(args);
}
