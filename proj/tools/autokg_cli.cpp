#include "autokg/cli.hpp"

int main(int argc, char** argv) { return autokg::cli_main(argc, argv); }
