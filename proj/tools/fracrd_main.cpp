#include <iostream>
#include <string>
#include <vector>

#include "fracrd/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fracrd::run_cli(args, std::cout, std::cerr);
}
