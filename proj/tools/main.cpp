#include "gglangevin/cli.hpp"

int main(int argc, char** argv) { return gg::cli_main(argc, argv); }
