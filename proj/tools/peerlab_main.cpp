#include <string>
#include <vector>

#include "peerlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return peerlab::cli::run_cli(args);
}
