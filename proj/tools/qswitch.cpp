#include <iostream>

#include "qswitch/cli.hpp"

int main(int argc, char** argv) { return qswitch::cli::run(argc, argv, std::cout, std::cerr); }
