#include <iostream>

#include <renormlab/cli.hpp>

int main(int argc, char** argv) { return renormlab::cli::run(argc, argv, std::cout, std::cerr); }
