#include "qoc/runner.hpp"

int main(int argc, char** argv) { return qoc::run_main(argc, argv); }
