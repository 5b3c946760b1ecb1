#include "pvgr/cli.hpp"

int main(int argc, char** argv) { return pvgr::cli_main(argc, argv); }
