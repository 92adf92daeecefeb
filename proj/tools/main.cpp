#include "aqcast/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return aqcast::cli::cli_main(argc, argv, std::cout, std::cerr);
}
