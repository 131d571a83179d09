#include <iostream>

#include "perturbopt_cli/cli.hpp"

int main(int argc, char** argv) { return perturbopt::cli::run_cli(argc, argv, std::cout, std::cerr); }
