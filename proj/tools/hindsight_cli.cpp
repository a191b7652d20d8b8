// hindsight command line tool.

#include <iostream>
#include <string>
#include <vector>

#include "hindsight/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return hindsight::run_cli(args, std::cout, std::cerr);
}
