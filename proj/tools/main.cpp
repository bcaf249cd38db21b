#include <iostream>

#include "irgof/cli.hpp"

int main(int argc, char** argv) { return irgof::main_entry(argc, argv, std::cout, std::cerr); }
