#include <iostream>

#include "qloc/cli.hpp"

int main(int argc, char** argv) { return qloc::run_cli(argc, argv, std::cout, std::cerr); }
