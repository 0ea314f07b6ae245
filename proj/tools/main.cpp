#include <iostream>

#include "attrbias/cli.hpp"

int main(int argc, char** argv) { return attrbias::run_cli(argc, argv, std::cout, std::cerr); }
