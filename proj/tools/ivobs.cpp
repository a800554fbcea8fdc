#include "ivobs/cli.hpp"

int main(int argc, char** argv) { return ivobs::cli_main(argc, argv); }
