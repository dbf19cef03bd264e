#include <iostream>

#include "capplan/cli.hpp"

int main(int argc, char** argv) { return capplan::cli::run(argc, argv, std::cout, std::cerr); }
