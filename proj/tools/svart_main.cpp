#include <iostream>

#include "svart/cli.hpp"

int main(int argc, char** argv) { return svart::cli::run(argc, argv, std::cout, std::cerr); }
