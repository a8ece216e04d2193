#include "commands.hpp"

int main(int argc, char** argv)
{
    return polycyclic::cli::run(argc, argv);
}
