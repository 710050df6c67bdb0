#include "rsport/cli/commands.hpp"

int main(int argc, char** argv) { return rsport::cli::run_cli(argc, argv); }
