#include <iostream>

#include "mlrem/cli.hpp"

int main(int argc, char** argv) {
    return mlrem::run_cli(argc, argv, std::cout, std::cerr);
}
