// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

int main(int argc, char** argv)
{
    return d2dra::cli::run(std::vector<std::string>(argv, argv + argc));
}
