#include "vassbound/cli.hpp"

#include <iostream>

int main( int argc, char** argv )
{
    return vassbound::run_cli( argc, argv, std::cout, std::cerr );
}
