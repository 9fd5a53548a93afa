#include "patchscope/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return patchscope::cli_main(argc, argv, std::cout, std::cerr); }
