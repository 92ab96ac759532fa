#include "creagentive/cli.hpp"

int main(int argc, char** argv) { return creagentive::run_cli(argc, argv); }
