#include "cli.hpp"

int main(int argc, char** argv) { return signas::cli::run(argc, argv); }
