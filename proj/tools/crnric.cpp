#include <iostream>

#include "crnric/cli.hpp"

int main(int argc, char** argv) { return crnric::run_cli(argc, argv, std::cout, std::cerr); }
