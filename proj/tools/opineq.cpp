#include "opineq/cli.hpp"

int main(int argc, char** argv) { return opineq::cli::dispatch(argc, argv); }
