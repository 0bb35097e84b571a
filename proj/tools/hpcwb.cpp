#include "hpcwb/cli.hpp"

int main(int argc, char** argv) { return hpcwb::cli::run(argc, argv); }
