#include "gridscope/cli.hpp"

int main(int argc, char** argv) { return gridscope::cli::cli_dispatch(argc, argv); }
