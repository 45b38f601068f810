#include <iostream>

#include "gvcp_cli.hpp"

int main(int argc, char** argv) { return gvcp::cli::run(argc, argv, std::cout, std::cerr); }
