#include "cascreen/cli.hpp"

int main(int argc, char** argv) { return cascreen::run_cli(argc, argv); }
