// SPDX-License-Identifier: Apache-2.0
#ifndef PROMPT_ELITES_CLI_HPP
#define PROMPT_ELITES_CLI_HPP

#include <string>
#include <vector>

namespace prompt_elites {

/// Entry point behind the prompt-elites binary. `args` excludes the program
/// name. Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(std::vector<std::string> args);

}  // namespace prompt_elites

#endif
