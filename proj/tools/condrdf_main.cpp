#include "condrdf/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return condrdf::cli::run(argc, argv, std::cout, std::cerr); }
