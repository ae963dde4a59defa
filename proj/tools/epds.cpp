#include "epds/cli.hpp"

int main(int argc, char** argv) { return epds::cli::run(argc, argv); }
