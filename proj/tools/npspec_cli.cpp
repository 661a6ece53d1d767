#include "npspec/cli.hpp"

int main(int argc, char** argv) { return npspec::cli::dispatch(argc, argv); }
