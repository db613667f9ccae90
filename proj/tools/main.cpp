#include "cli.hpp"

int main(int argc, char** argv) { return mineco::run_cli(argc, argv); }
