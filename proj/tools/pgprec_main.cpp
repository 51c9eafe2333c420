#include "pgprec/cli.hpp"

int main(int argc, char** argv) { return pgprec::run_cli(argc, argv); }
