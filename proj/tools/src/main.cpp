#include <iostream>

#include "mce_cli/cli.hpp"

int main(int argc, char** argv) { return mce::cli::run_cli(argc, argv, std::cout, std::cerr); }
