#include "dtwc/cli.hpp"

int main(int argc, char** argv) {
    return dtwc::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
