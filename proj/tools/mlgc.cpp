#include "mlgc/cli.hpp"

int main(int argc, char** argv) { return mlgc::cli::run(argc, argv); }
