#include "radioslam/harness.hpp"

int main(int argc, char** argv) { return radioslam::cli_dispatch(argc, argv); }
