#include <iostream>

#include "fractrace/cli.hpp"

int main(int argc, char** argv) { return fractrace::cli_main(argc, argv, std::cout, std::cerr); }
