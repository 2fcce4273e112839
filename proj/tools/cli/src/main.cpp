#include "critcf/cli.hpp"

int main(int argc, char** argv) { return critcf::cli::run(argc, argv); }
