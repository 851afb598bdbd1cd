#include "cli.hpp"

int main(int argc, char** argv) { return vocadapt::cli::run(argc, argv); }
