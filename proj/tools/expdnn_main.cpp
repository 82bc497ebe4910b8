#include <string>
#include <vector>

#include "expdnn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return expdnn::dispatch(args);
}
