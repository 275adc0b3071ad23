#include "nsv/cli.hpp"

int main(int argc, char** argv) { return nsv::cli::run_cli(argc, argv); }
