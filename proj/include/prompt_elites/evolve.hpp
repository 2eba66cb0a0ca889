// SPDX-License-Identifier: Apache-2.0
//
// MAP-Elites over prompt genotypes plus the equal-budget random-search
// baseline. With the mock evaluator, runs are bit-reproducible from
// RunConfig::seed at any parallelism.
#ifndef PROMPT_ELITES_EVOLVE_HPP
#define PROMPT_ELITES_EVOLVE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "prompt_elites/archive.hpp"
#include "prompt_elites/evaluator.hpp"
#include "prompt_elites/grammar.hpp"
#include "prompt_elites/random.hpp"
#include "prompt_elites/tasks.hpp"

namespace prompt_elites {

enum class Algorithm { MapElites, RandomSearch };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct RunConfig {
    int population_size = 50;
    int num_iterations = 10;
    double mut_rate = 0.40;    // fraction of the population mutated per iteration
    double mut_chance = 0.40;  // per-locus mutation probability
    int num_evaluations = 50;  // task instances per fitness evaluation
    BinConfig bin_config{};    // (2, 25, 2)
    int max_shots = 10;
    std::uint64_t seed = 0;
    Algorithm algorithm = Algorithm::MapElites;
    int parallelism = 1;  // max concurrent fitness evaluations

    double hp_threshold = 0.55;                // logged high-performer coverage
    std::vector<int> coverage_universe{5, 5};  // shots x depth bins for logged coverage
};

void validate(const RunConfig& cfg);

struct IterationRecord {
    int iteration = 0;
    double fitness_min = 0.0, fitness_mean = 0.0, fitness_max = 0.0;
    std::size_t archive_size = 0;
    double coverage_any = 0.0, coverage_hp = 0.0;
    int insertions = 0;  // Inserted + Replaced events this iteration
    int evaluator_failures = 0;
};

struct RunLog {
    std::string task_name;
    std::string algorithm_name;
    std::string model_tag;
    std::vector<IterationRecord> iterations;
    long total_model_calls = 0;
    long total_cache_hits = 0;
    long total_failures = 0;
    bool degraded = false;   // any evaluator transport failure
    double wall_time_ms = 0.0;  // console reporting only; kept out of exports
    std::vector<Individual> population_records;  // every evaluated individual, in order
};

struct RunResult {
    Archive archive;
    RunLog log;
};

/// One population slot awaiting evaluation.
struct PopulationMember {
    Genotype genotype;
    std::optional<int> parent_id;
};

/// Offspring from round(mut_rate * population_size) uniformly selected
/// members (without replacement), topped up to population_size with uniform
/// draws (with replacement) from the archive elites.
std::vector<PopulationMember> next_generation(const std::vector<Individual>& population,
                                              const Archive& archive, const RunConfig& cfg,
                                              const Grammar& grammar, Rng& rng);

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Algorithm: random initial population; each iteration evaluates everyone on
/// the run's fixed instance set, bins and inserts into the archive, then
/// forms the next population from mutants plus archive draws.
RunResult run_map_elites(const RunConfig& cfg, const TaskDataset& task, const Grammar& grammar,
                         const GenericTables& tables, Evaluator& evaluator,
                         const IterationCallback& on_iteration = {});

/// Equal evaluation budget, every genotype drawn fresh; same archive
/// semantics, no mutation or archive reuse.
RunResult run_random_search(const RunConfig& cfg, const TaskDataset& task, const Grammar& grammar,
                            const GenericTables& tables, Evaluator& evaluator,
                            const IterationCallback& on_iteration = {});

}  // namespace prompt_elites

#endif
