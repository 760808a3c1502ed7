#include <iostream>

#include "jsq_cli.hpp"

int main(int argc, char** argv) { return jsq::cli::run(argc, argv, std::cout, std::cerr); }
