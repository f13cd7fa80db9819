#include <string>
#include <vector>

#include "zfepoch/cli.hpp"

int main(int argc, char** argv) {
  return zfepoch::cli::run(std::vector<std::string>(argv, argv + argc));
}
