#include <iostream>

#include "bnslab_cli/commands.hpp"

int main(int argc, char** argv) { return bnslab::cli::run_cli(argc, argv, std::cout, std::cerr); }
