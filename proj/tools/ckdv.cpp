#include <ckdv/cli.hpp>

int main(int argc, char** argv) { return ckdv::run_cli(argc, argv); }
