#include <iostream>

#include "dbtile/cli.hpp"

int main(int argc, char** argv) { return dbtile::cli::run(argc, argv, std::cout, std::cerr); }
