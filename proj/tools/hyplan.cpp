#include "cli.hpp"

int main(int argc, char** argv) { return hyplan::cli::run(argc, argv); }
