#include "quis/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return quis::cli_run(args, std::cout, std::cerr);
}
