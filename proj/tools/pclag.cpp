#include "pclag/cli.hpp"

int main(int argc, char** argv) { return pclag::run_cli(argc, argv); }
