#include "cli.hpp"

int main(int argc, char** argv) { return pulsesynth::cli::run(argc, argv); }
