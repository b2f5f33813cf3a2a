#include "adasparse/cli.hpp"

int main(int argc, char** argv) { return adasparse::run_cli(argc, argv); }
