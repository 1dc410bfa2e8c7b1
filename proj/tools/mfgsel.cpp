#include "mfgsel/cli.hpp"

int main(int argc, char** argv) { return mfgsel::cli::main(argc, argv); }
