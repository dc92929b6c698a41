#include <iostream>
#include <string>
#include <vector>

#include "mopdil/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return mopdil::cli_dispatch(args, std::cout, std::cerr);
}
