#include "cli/commands.hpp"

int main(int argc, char** argv) { return fedsim::cli::run_cli(argc, argv); }
