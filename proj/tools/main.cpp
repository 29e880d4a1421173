#include "softmesh/cli.hpp"

int main(int argc, char** argv) { return softmesh::run_cli(argc, argv); }
