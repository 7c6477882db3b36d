#include <iostream>
#include <string>
#include <vector>

#include "wcascade/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return wcascade::run_cli(args, std::cout, std::cerr);
}
