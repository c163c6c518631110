#include <iostream>

#include "squarepack/cli.hpp"

int main(int argc, char** argv) { return squarepack::run_cli(argc, argv, std::cout, std::cerr); }
