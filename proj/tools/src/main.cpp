#include <iostream>
#include <string>
#include <vector>

#include "fishdet/cli/commands.hpp"
#include "fishdet/log.hpp"

int main(int argc, char** argv) {
    fishdet::init_logging_from_env();
    const std::vector<std::string> args(argv + 1, argv + argc);
    return fishdet::cli::run_cli(args, std::cout, std::cerr);
}
