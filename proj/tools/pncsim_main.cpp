#include "pnc/cli.hpp"

int main(int argc, char** argv) { return pnc::cli_main(argc, argv); }
