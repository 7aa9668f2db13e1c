#include <iostream>

#include "wrenchsim/cli.hpp"

int main(int argc, char** argv) { return wrenchsim::cli::main(argc, argv, std::cout, std::cerr); }
