#include "mfhp/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mfhp::cli_main(argc, argv, std::cout, std::cerr); }
