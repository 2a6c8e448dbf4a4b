#include "relchain/cli.hpp"

int main(int argc, char** argv) { return relchain::run_cli(argc, argv); }
