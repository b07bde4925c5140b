#include <iostream>

#include "moments/cli.hpp"

int main(int argc, char** argv) { return moments::run(argc, argv, std::cout, std::cerr); }
