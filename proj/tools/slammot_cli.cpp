#include "slammot/cli_app.hpp"

int main(int argc, char** argv) { return slammot::cli_main(argc, argv); }
