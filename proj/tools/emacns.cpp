#include "emac/bench.hpp"

int main(int argc, char** argv) { return emac::cli_main(argc, argv); }
