#include "dsl/cli.hpp"

int main(int argc, char** argv) { return dsl::cli::run(argc, argv); }
