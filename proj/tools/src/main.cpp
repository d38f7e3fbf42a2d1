#include "h2h_tools/commands.hpp"

int main(int argc, char** argv) { return h2h::cli::run(argc, argv); }
