#include <iostream>

#include "cli/run.hpp"

int main(int argc, char** argv) { return ringwave::cli::main_entry(argc, argv, std::cout, std::cerr); }
