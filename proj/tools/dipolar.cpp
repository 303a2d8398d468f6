#include <iostream>

#include "dipolar/commands.hpp"

int main(int argc, char** argv) { return dipolar::cli::run_cli(argc, argv, std::cout, std::cerr); }
