#include "freepulse/cli.hpp"

int main(int argc, char** argv) { return freepulse::cli::run(argc, argv); }
