#include "streamgov/cli.hpp"

int main(int argc, char** argv) { return streamgov::cli::run(argc, argv); }
