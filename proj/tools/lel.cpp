#include "lel/cli.hpp"

int main(int argc, char** argv) { return lel::run_cli(argc, argv); }
