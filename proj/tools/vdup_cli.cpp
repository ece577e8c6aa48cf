#include "commands.hpp"

int main(int argc, char** argv) { return vdup::cli::run(argc, argv); }
