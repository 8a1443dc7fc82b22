#include <iostream>

#include "dia/cli.hpp"

int main(int argc, char** argv) { return dia::cli::main(argc, argv, std::cout, std::cerr); }
