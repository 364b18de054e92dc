#include <iostream>

#include "cspec/cli.hpp"

int main(int argc, char** argv) { return cspec::cli::run(argc, argv, std::cout, std::cerr); }
