#include "reinforce/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return reinforce::run_cli(argc, argv, std::cout, std::cerr);
}
