#include <iostream>
#include <string>
#include <vector>

#include "tslin/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return tslin::cli::run(args, std::cout, std::cerr);
}
