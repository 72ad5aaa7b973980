#include "ouc/cli.hpp"

int main(int argc, char** argv) { return ouc::cli::dispatch(argc, argv); }
