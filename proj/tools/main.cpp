#include <iostream>

#include "crossfake/cli.hpp"

int main(int argc, char** argv) { return crossfake::run_cli(argc, argv, std::cout, std::cerr); }
