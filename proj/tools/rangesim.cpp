#include "rangesim/scenario/runner.hpp"

int main(int argc, char** argv) { return rangesim::cli_main(argc, argv); }
