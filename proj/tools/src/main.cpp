#include <iostream>

#include "sperner_fix/cli.hpp"

int main(int argc, char** argv) {
    return sperner_fix::cli::run(argc, argv, std::cout, std::cerr);
}
