#include <iostream>
#include <string>
#include <vector>

#include "oamturb/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return oamturb::cli::run_cli(args, std::cout, std::cerr);
}
