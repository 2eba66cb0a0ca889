// SPDX-License-Identifier: Apache-2.0
#ifndef PROMPT_ELITES_EXPORTS_HPP
#define PROMPT_ELITES_EXPORTS_HPP

#include <span>
#include <string>
#include <vector>

#include "prompt_elites/evolve.hpp"
#include "prompt_elites/stats.hpp"

namespace prompt_elites {

/// Canonical run-log JSON. Deterministic for a fixed seed: wall time is
/// deliberately absent (it goes to the console summary instead).
std::string run_log_to_json_text(const RunConfig& cfg, const RunLog& log);

/// One row per evaluated individual; the input to the analyze pipeline.
std::string population_to_csv_text(std::span<const Individual> individuals);
std::vector<PopulationRow> population_from_csv_text(const std::string& csv_text);
std::vector<PopulationRow> load_population(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace prompt_elites

#endif
