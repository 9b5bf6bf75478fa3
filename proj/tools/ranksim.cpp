#include "ranksim/cli.hpp"

int main(int argc, char** argv) { return ranksim::cli::main(argc, argv); }
