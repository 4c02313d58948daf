#include <iostream>

#include "cli/commands.hpp"

int main(int argc, char** argv) { return ceo_rd::cli::run(argc, argv, std::cout, std::cerr); }
