#include <iostream>

#include "spamclf/cli.hpp"

int main(int argc, char** argv) { return spamclf::cli::run(argc, argv, std::cout, std::cerr); }
