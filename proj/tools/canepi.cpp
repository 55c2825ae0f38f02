#include "canepi/cli.hpp"

int main(int argc, char** argv) { return canepi::cli::main(argc, argv); }
