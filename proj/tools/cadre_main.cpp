#include <iostream>

#include "cadre/cli.hpp"

int main(int argc, char** argv) { return cadre::run_cli(argc, argv, std::cout, std::cerr); }
