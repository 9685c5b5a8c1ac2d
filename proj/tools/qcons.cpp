#include "qcons/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return qcons::cli::main(argc, argv, std::cout, std::cerr); }
