#include "evload/cli.hpp"

int main(int argc, char** argv) { return evload::cli::run(argc, argv); }
