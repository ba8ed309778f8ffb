#include "cli.hpp"

int main(int argc, char** argv) { return laprep::cli::run(argc, argv); }
