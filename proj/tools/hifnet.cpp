#include "hifnet/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hifnet::cli::run(argc, argv, std::cout, std::cerr); }
