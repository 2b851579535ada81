#include "corrbound/cli.hpp"

int main(int argc, char** argv) { return corrbound::run_cli(argc, argv); }
