#include "rwr/cli.hpp"

int main(int argc, char** argv) { return rwr::cli::run(argc, argv); }
