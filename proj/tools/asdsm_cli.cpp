#include "asdsm/cli.hpp"

int main(int argc, char** argv) { return asdsm::cli_main(argc, argv); }
