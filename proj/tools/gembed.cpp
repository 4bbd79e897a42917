#include "gembed/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gembed::cli::run(argc, argv, std::cout, std::cerr); }
