#include <iostream>

#include "rieszwave/cli.hpp"

int main(int argc, char** argv) { return rieszwave::run_cli(argc, argv, std::cout, std::cerr); }
