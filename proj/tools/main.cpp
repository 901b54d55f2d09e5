#include "sparse_minimax/cli.hpp"

int main(int argc, char** argv) { return sparse_minimax::cli::run(argc, argv); }
