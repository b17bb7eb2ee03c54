#include <iostream>

#include "pqa/cli.hpp"

int main(int argc, char** argv) { return pqa::run_cli(argc, argv, std::cout, std::cerr); }
