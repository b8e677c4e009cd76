#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return flagwalk::tools::run(argc, argv, std::cout, std::cerr); }
