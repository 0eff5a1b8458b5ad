#include "irlab/cli.hpp"

int main(int argc, char** argv) { return irlab::cli::run(argc, argv); }
