#include "wmauth/cli.hpp"

int main(int argc, char** argv) { return wmauth::cli_main(argc, argv); }
