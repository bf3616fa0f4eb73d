#include <oqn/harness/cli.hpp>

int main(int argc, char** argv) { return oqn::run_cli(argc, argv); }
