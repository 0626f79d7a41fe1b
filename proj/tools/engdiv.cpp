#include <iostream>

#include "engdiv/cli.hpp"

int main(int argc, char** argv) { return engdiv::cli::run(argc, argv, std::cout, std::cerr); }
