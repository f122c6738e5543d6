#include <iostream>

#include "loopsim/cli.hpp"

int main(int argc, char** argv) {
    return loopsim::cli::run_cli(argc, argv, std::cout, std::cerr);
}
