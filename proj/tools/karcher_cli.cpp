#include "karcher/experiment.hpp"

#include <iostream>

int main(int argc, char** argv) { return karcher::cli_main(argc, argv, std::cout, std::cerr); }
