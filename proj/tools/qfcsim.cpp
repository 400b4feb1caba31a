#include <iostream>
#include <string>
#include <vector>

#include "qfcsim/commands.hpp"

int main(int argc, char** argv)
{
    return qfcsim::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
