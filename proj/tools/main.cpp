#include "metadetect/cli.hpp"

int main(int argc, char** argv) { return metadetect::run_subcommand(argc, argv); }
