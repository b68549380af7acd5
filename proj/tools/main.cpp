#include <iostream>

#include "sparse_guarantees/cli.hpp"

int main(int argc, char** argv) { return sparse_guarantees::run_cli(argc, argv, std::cout, std::cerr); }
