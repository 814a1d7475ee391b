#include "dmcanc/cli.hpp"

int main(int argc, char** argv) { return dmcanc::cli_main(argc, argv); }
