#include "cli.hpp"

int main(int argc, char** argv) { return ufrbf::cli::run(argc, argv); }
