#include <iostream>

#include "nadev/commands.hpp"

int main(int argc, char** argv) { return nadev::run_cli(argc, argv, std::cout, std::cerr); }
