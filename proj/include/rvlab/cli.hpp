#pragma once

namespace rvlab {

// Parses argv, runs one subcommand and returns the process exit status.
int parse_and_dispatch(int argc, char** argv);

}  // namespace rvlab
