#include "ubopf/cli.hpp"

int main(int argc, char** argv) { return ubopf::cli_main(argc, argv); }
