#include "qst/cli.hpp"

int main(int argc, char** argv) { return qst::run_cli(argc, argv); }
