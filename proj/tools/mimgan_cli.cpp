#include <string>
#include <vector>

#include "mimgan/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return mimgan::cli::dispatch(args);
}
