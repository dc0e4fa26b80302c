#include <iostream>

#include "mcdm/cli.hpp"

int main(int argc, char** argv) { return mcdm::cli::run(argc, argv, std::cout, std::cerr); }
