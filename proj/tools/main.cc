#include "commands.h"

int main(int argc, char **argv) { return xltag::cli::run_cli(argc, argv); }
