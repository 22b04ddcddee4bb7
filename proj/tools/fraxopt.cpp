#include <string>
#include <vector>

#include "fraxopt/cli.hpp"

int main(int argc, char** argv) {
    return fraxopt::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
