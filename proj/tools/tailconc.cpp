#include "tailconc/cli.hpp"

int main(int argc, char** argv) { return tailconc::cli_main(argc, argv); }
