#include "ftt/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ftt::command_dispatch(args, std::cout, std::cerr);
}
