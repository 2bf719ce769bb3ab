#include <iostream>

#include "phantomdr/cli.hpp"

int main(int argc, char** argv) { return phantomdr::cli::run(argc, argv, std::cout, std::cerr); }
