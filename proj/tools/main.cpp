#include "commands.hpp"

int main(int argc, char** argv) { return mirspec_cli::run(argc, argv); }
