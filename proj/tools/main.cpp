#include "eulertopo/cli.hpp"

int main(int argc, char** argv) { return eulertopo::cli::run(argc, argv); }
