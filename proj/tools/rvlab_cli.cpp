#include "rvlab/cli.hpp"

int main(int argc, char** argv) { return rvlab::parse_and_dispatch(argc, argv); }
