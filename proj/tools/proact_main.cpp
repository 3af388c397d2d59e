#include <iostream>

#include "proact/cli.hpp"

int main(int argc, char** argv) { return proact::run_cli(argc, argv, std::cout, std::cerr); }
