#include <iostream>

#include "frachs/cli.hpp"

int main(int argc, char** argv) { return frachs::cli_main(argc, argv, std::cout, std::cerr); }
