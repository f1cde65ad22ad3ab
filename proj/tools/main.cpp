#include <iostream>
#include <string>
#include <vector>

#include "cvqa/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cvqa::run_cli(args, std::cout, std::cerr);
}
