#include <iostream>

#include "drn/cli.hpp"

int main(int argc, char **argv)
{
    drn::apply_determinism_from_env();
    std::vector<std::string> args(argv + 1, argv + argc);
    return drn::run_cli(args, std::cout, std::cerr);
}
