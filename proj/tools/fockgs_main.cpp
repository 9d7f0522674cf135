#include "fockgs/cli.hpp"

int main(int argc, char** argv) { return fockgs::cli::main(argc, argv); }
