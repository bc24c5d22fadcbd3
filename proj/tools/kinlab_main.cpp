#include "kinlab/expt/cli.hpp"

int main(int argc, char** argv) { return kinlab::expt::cli_main(argc, argv); }
