#include <string>
#include <vector>

#include "polburst/io.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return polburst::io::run_cli(args);
}
