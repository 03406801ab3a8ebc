#include "endgame/cli.hpp"

int main(int argc, char** argv) { return endgame::cli_main(argc, argv); }
