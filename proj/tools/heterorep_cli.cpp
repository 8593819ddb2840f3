#include "heterorep/cli.hpp"

int main(int argc, char** argv) { return heterorep::run_cli(argc, argv); }
