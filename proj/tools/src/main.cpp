#include "homoflow_cli/commands.hpp"

int main(int argc, char** argv) { return homoflow::cli::run(argc, argv); }
