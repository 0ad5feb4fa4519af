#include "sovai/api.hpp"

#include <iostream>

int main(int argc, char** argv) { return sovai::runCli(argc, argv, std::cout, std::cerr); }
