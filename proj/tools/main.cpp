#include "fplab/cli.hpp"

int main(int argc, char** argv) { return fplab::run_cli(argc, argv); }
