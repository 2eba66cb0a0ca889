// SPDX-License-Identifier: Apache-2.0
#include <vector>

#include "prompt_elites/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return prompt_elites::run_cli(std::move(args));
}
