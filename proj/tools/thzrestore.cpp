#include <vector>

#include "thz/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return thz::cli_run(args);
}
