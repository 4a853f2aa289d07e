#include "sphvar/cli.hpp"

int main(int argc, char** argv) { return sphvar::run(argc, argv); }
