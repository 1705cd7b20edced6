#include "mlsq/cli.hpp"

int main(int argc, char** argv) { return mlsq::cli_main(argc, argv); }
