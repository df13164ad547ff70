#include "trellis_astar/cli.hpp"

int main(int argc, char** argv) { return trellis_astar::cli::run(argc, argv); }
