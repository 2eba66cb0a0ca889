// SPDX-License-Identifier: Apache-2.0
#include "prompt_elites/evolve.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "prompt_elites/errors.hpp"

namespace prompt_elites {

const char* to_string(Algorithm a) {
    return a == Algorithm::MapElites ? "map-elites" : "random";
}

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "map-elites") return Algorithm::MapElites;
    if (name == "random") return Algorithm::RandomSearch;
    throw ConfigError("unknown algorithm '" + name + "' (expected map-elites or random)");
}

void validate(const RunConfig& cfg) {
    if (cfg.population_size < 1) throw ConfigError("population_size must be >= 1");
    if (cfg.num_iterations < 1) throw ConfigError("num_iterations must be >= 1");
    if (cfg.num_evaluations < 1) throw ConfigError("num_evaluations must be >= 1");
    if (cfg.mut_rate < 0.0 || cfg.mut_rate > 1.0) throw ConfigError("mut_rate must be in [0,1]");
    if (cfg.mut_chance < 0.0 || cfg.mut_chance > 1.0) throw ConfigError("mut_chance must be in [0,1]");
    if (cfg.max_shots < 0) throw ConfigError("max_shots must be >= 0");
    if (cfg.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (cfg.bin_config.shots_width < 1 || cfg.bin_config.words_width < 1 ||
        cfg.bin_config.depth_width < 1)
        throw ConfigError("bin widths must be >= 1");
    if (cfg.coverage_universe.size() != 2 || cfg.coverage_universe[0] < 1 ||
        cfg.coverage_universe[1] < 1)
        throw ConfigError("coverage universe must be two positive bin counts");
}

namespace {

struct StreamTag {
    static constexpr std::uint64_t init() { return 0x696e6974ull; }
    static constexpr std::uint64_t instances() { return 0x65766c69ull; }
    static constexpr std::uint64_t generation() { return 0x67656e65ull; }
};

// Evaluates one population in parallel (bounded by cfg.parallelism) and
// merges results in population-index order, so scheduling never leaks into
// outcomes. IDs are assigned by index before any work starts.
std::vector<Individual> evaluate_population(const std::vector<PopulationMember>& population,
                                            const RunConfig& cfg, const TaskDataset& task,
                                            const Grammar& grammar, const GenericTables& tables,
                                            Evaluator& evaluator,
                                            const std::vector<int>& eval_indices, int iteration,
                                            int id_base, int& failures) {
    std::vector<Individual> results(population.size());
    std::atomic<std::size_t> cursor{0};
    std::atomic<int> failure_count{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto evaluate_one = [&](std::size_t i) {
        const PopulationMember& member = population[i];
        PromptTemplate tmpl = expand(member.genotype, grammar, tables);
        const std::string reference = reference_prompt_text(tmpl, task, member.genotype.example_seeds);
        Individual ind;
        ind.id = id_base + static_cast<int>(i);
        ind.genotype = member.genotype;
        ind.phenotype = extract(tmpl, reference);
        ind.ttr = type_token_ratio(reference);
        ind.provenance = {iteration, member.parent_id};
        FitnessResult fr = evaluator.fitness(member.genotype, task, eval_indices, grammar, tables);
        ind.fitness = fr.fitness;
        ind.eval_count = static_cast<int>(fr.outcomes.size());
        failure_count.fetch_add(fr.transport_failures);
        results[i] = std::move(ind);
    };

    auto worker = [&] {
        for (;;) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= population.size()) break;
            try {
                evaluate_one(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    const int threads = std::min<int>(cfg.parallelism, static_cast<int>(population.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    failures = failure_count.load();
    return results;
}

IterationRecord summarize(int iteration, const std::vector<Individual>& evaluated,
                          const Archive& archive, const RunConfig& cfg, int insertions,
                          int failures) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.fitness_min = 1.0;
    rec.fitness_max = 0.0;
    double sum = 0.0;
    for (const Individual& ind : evaluated) {
        rec.fitness_min = std::min(rec.fitness_min, ind.fitness);
        rec.fitness_max = std::max(rec.fitness_max, ind.fitness);
        sum += ind.fitness;
    }
    rec.fitness_mean = sum / static_cast<double>(evaluated.size());
    rec.archive_size = archive.size();
    const std::vector<Axis> axes{Axis::Shots, Axis::Depth};
    rec.coverage_any = coverage(archive, axes, 0.0, cfg.coverage_universe);
    rec.coverage_hp = coverage(archive, axes, cfg.hp_threshold, cfg.coverage_universe);
    rec.insertions = insertions;
    rec.evaluator_failures = failures;
    return rec;
}

RunResult run_common(const RunConfig& cfg, const TaskDataset& task, const Grammar& grammar,
                     const GenericTables& tables, Evaluator& evaluator, bool map_elites,
                     const IterationCallback& on_iteration) {
    validate(cfg);
    const auto started = std::chrono::steady_clock::now();

    Rng rng_init(mix_seed({cfg.seed, StreamTag::init()}));
    Rng rng_instances(mix_seed({cfg.seed, StreamTag::instances()}));
    const std::vector<int> eval_indices =
        sample_eval_instances(task, cfg.num_evaluations, rng_instances);

    RunResult result{Archive(cfg.bin_config), {}};
    RunLog& log = result.log;
    log.task_name = task.name;
    log.algorithm_name = to_string(map_elites ? Algorithm::MapElites : Algorithm::RandomSearch);

    auto fresh_population = [&](int n) {
        std::vector<PopulationMember> population;
        population.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            population.push_back({random_genotype(grammar, rng_init, cfg.max_shots), std::nullopt});
        return population;
    };

    std::vector<PopulationMember> population = fresh_population(cfg.population_size);
    int next_id = 0;
    const long calls_before = evaluator.total_model_calls();

    for (int iteration = 1; iteration <= cfg.num_iterations; ++iteration) {
        int failures = 0;
        std::vector<Individual> evaluated =
            evaluate_population(population, cfg, task, grammar, tables, evaluator, eval_indices,
                                iteration, next_id, failures);
        next_id += static_cast<int>(evaluated.size());

        int insertions = 0;
        for (const Individual& ind : evaluated) {
            if (result.archive.try_insert(ind, iteration) != InsertOutcome::Rejected) ++insertions;
        }
        log.iterations.push_back(
            summarize(iteration, evaluated, result.archive, cfg, insertions, failures));
        if (on_iteration) on_iteration(log.iterations.back());
        log.total_failures += failures;

        if (iteration < cfg.num_iterations) {
            if (map_elites) {
                Rng rng_gen(mix_seed({cfg.seed, StreamTag::generation(),
                                      static_cast<std::uint64_t>(iteration)}));
                population = next_generation(evaluated, result.archive, cfg, grammar, rng_gen);
            } else {
                population = fresh_population(cfg.population_size);
            }
        }
        for (Individual& ind : evaluated) log.population_records.push_back(std::move(ind));
    }

    log.total_model_calls = evaluator.total_model_calls() - calls_before;
    log.total_cache_hits = evaluator.total_cache_hits();
    log.degraded = log.total_failures > 0;
    log.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    return result;
}

}  // namespace

std::vector<PopulationMember> next_generation(const std::vector<Individual>& population,
                                              const Archive& archive, const RunConfig& cfg,
                                              const Grammar& grammar, Rng& rng) {
    if (archive.size() == 0) throw ConfigError("next_generation needs a non-empty archive");
    const int n = cfg.population_size;
    const int offspring_count =
        static_cast<int>(std::floor(cfg.mut_rate * static_cast<double>(n) + 0.5));

    // Uniform selection without replacement.
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < offspring_count && static_cast<std::size_t>(i) < order.size(); ++i) {
        std::size_t j = static_cast<std::size_t>(i) +
                        rng.uniform_index(order.size() - static_cast<std::size_t>(i));
        std::swap(order[static_cast<std::size_t>(i)], order[j]);
    }

    std::vector<PopulationMember> next;
    next.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < offspring_count && static_cast<std::size_t>(i) < population.size(); ++i) {
        const Individual& parent = population[order[static_cast<std::size_t>(i)]];
        next.push_back({mutate(parent.genotype, cfg.mut_chance, rng, grammar, cfg.max_shots),
                        parent.id});
    }
    const std::vector<Individual> elites = archive.elites();
    while (static_cast<int>(next.size()) < n) {
        const Individual& elite = elites[rng.uniform_index(elites.size())];
        next.push_back({elite.genotype, elite.id});
    }
    return next;
}

RunResult run_map_elites(const RunConfig& cfg, const TaskDataset& task, const Grammar& grammar,
                         const GenericTables& tables, Evaluator& evaluator,
                         const IterationCallback& on_iteration) {
    return run_common(cfg, task, grammar, tables, evaluator, /*map_elites=*/true, on_iteration);
}

RunResult run_random_search(const RunConfig& cfg, const TaskDataset& task, const Grammar& grammar,
                            const GenericTables& tables, Evaluator& evaluator,
                            const IterationCallback& on_iteration) {
    return run_common(cfg, task, grammar, tables, evaluator, /*map_elites=*/false, on_iteration);
}

}  // namespace prompt_elites
