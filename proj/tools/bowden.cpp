#include "bowden/cli.hpp"

int main(int argc, char** argv) { return bowden::cli::main(argc, argv); }
