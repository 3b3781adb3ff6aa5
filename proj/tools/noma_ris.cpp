#include "noma_ris/cli.hpp"

int main(int argc, char** argv) { return noma_ris::cli::main(argc, argv); }
