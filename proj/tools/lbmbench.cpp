#include "lbm/cli.hpp"

int main(int argc, char** argv) { return lbm::cli_main(argc, argv); }
