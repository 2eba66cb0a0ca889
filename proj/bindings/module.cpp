// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the core operations: grammar expansion and mutation,
// task instantiation, phenotype extraction, the archive, mock-evaluator
// fitness, full runs, and the statistics battery.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prompt_elites/errors.hpp"
#include "prompt_elites/evolve.hpp"
#include "prompt_elites/exports.hpp"
#include "prompt_elites/stats.hpp"

namespace py = pybind11;
using namespace prompt_elites;

namespace {

Genotype genotype_from_parts(const std::vector<std::pair<std::string, int>>& choices,
                             const std::vector<std::uint64_t>& example_seeds) {
    Genotype g;
    for (const auto& [sym, idx] : choices) g.choices.push_back({sym, idx});
    g.example_seeds = example_seeds;
    return g;
}

std::vector<std::pair<std::string, int>> genotype_choices(const Genotype& g) {
    std::vector<std::pair<std::string, int>> out;
    for (const Choice& c : g.choices) out.emplace_back(c.symbol, c.rule_index);
    return out;
}

EvaluatorConfig mock_config(const std::string& rule, double param, std::uint64_t seed) {
    EvaluatorConfig cfg;
    cfg.kind = EvaluatorKind::Mock;
    cfg.mock_rule = {rule, param, seed};
    return cfg;
}

RunConfig make_run_config(int population_size, int num_iterations, double mut_rate,
                          double mut_chance, int num_evaluations, std::vector<int> bin_sizes,
                          int max_shots, std::uint64_t seed, const std::string& algorithm,
                          int parallelism) {
    RunConfig cfg;
    cfg.population_size = population_size;
    cfg.num_iterations = num_iterations;
    cfg.mut_rate = mut_rate;
    cfg.mut_chance = mut_chance;
    cfg.num_evaluations = num_evaluations;
    if (bin_sizes.size() == 3) cfg.bin_config = {bin_sizes[0], bin_sizes[1], bin_sizes[2]};
    cfg.max_shots = max_shots;
    cfg.seed = seed;
    cfg.algorithm = algorithm_from_string(algorithm);
    cfg.parallelism = parallelism;
    return cfg;
}

struct PyRunResult {
    Archive archive;
    RunLog log;
    RunConfig config;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "grammar-driven MAP-Elites search over LLM prompt structures";

    py::register_exception<Error>(m, "PromptElitesError", PyExc_RuntimeError);

    // ---- grammar -----------------------------------------------------------
    py::class_<Grammar>(m, "Grammar")
        .def_static("default_grammar", &Grammar::default_grammar)
        .def_static("from_json_text", &Grammar::from_json_text)
        .def_static("load_file", &Grammar::load_file)
        .def_property_readonly("start_symbol", &Grammar::start_symbol)
        .def("production_count",
             [](const Grammar& g, const std::string& nt) { return g.productions(nt).size(); });

    py::class_<GenericTables>(m, "GenericTables")
        .def_static("defaults", &GenericTables::defaults)
        .def_static("from_json_text", &GenericTables::from_json_text)
        .def_static("load_file", &GenericTables::load_file)
        .def_readwrite("contexts", &GenericTables::contexts)
        .def_readwrite("thoughts", &GenericTables::thoughts);

    py::class_<Genotype>(m, "Genotype")
        .def(py::init(&genotype_from_parts), py::arg("choices"),
             py::arg("example_seeds") = std::vector<std::uint64_t>{})
        .def_property_readonly("choices", &genotype_choices)
        .def_readwrite("example_seeds", &Genotype::example_seeds)
        .def("__eq__", [](const Genotype& a, const Genotype& b) { return a == b; })
        .def("__repr__", [](const Genotype& g) {
            std::string out = "Genotype([";
            for (std::size_t i = 0; i < g.choices.size(); ++i) {
                if (i) out += ", ";
                out += g.choices[i].symbol + std::to_string(g.choices[i].rule_index);
            }
            return out + "])";
        });

    py::class_<StructureSummary>(m, "StructureSummary")
        .def_readonly("shots", &StructureSummary::shots)
        .def_readonly("depth", &StructureSummary::depth)
        .def_readonly("has_context", &StructureSummary::has_context);

    py::class_<PromptTemplate>(m, "PromptTemplate")
        .def_readonly("summary", &PromptTemplate::summary)
        .def_property_readonly("fragments", [](const PromptTemplate& t) {
            std::vector<std::string> out;
            for (const auto& f : t.fragments) out.push_back(f.text);
            return out;
        });

    m.def("expand", &expand, py::arg("genotype"), py::arg("grammar"), py::arg("tables"));
    m.def(
        "validate",
        [](const Genotype& g, const Grammar& grammar) {
            ValidationResult r = validate(g, grammar);
            return py::make_tuple(r.ok, r.ok ? std::string() : r.issue->message);
        },
        py::arg("genotype"), py::arg("grammar"));
    m.def(
        "random_genotype",
        [](const Grammar& grammar, std::uint64_t seed, int max_shots) {
            Rng rng(seed);
            return random_genotype(grammar, rng, max_shots);
        },
        py::arg("grammar"), py::arg("seed"), py::arg("max_shots") = 10);
    m.def(
        "mutate",
        [](const Genotype& g, double mut_chance, std::uint64_t seed, const Grammar& grammar,
           int max_shots) {
            Rng rng(seed);
            return mutate(g, mut_chance, rng, grammar, max_shots);
        },
        py::arg("genotype"), py::arg("mut_chance"), py::arg("seed"), py::arg("grammar"),
        py::arg("max_shots") = 10);

    // ---- tasks --------------------------------------------------------------
    py::class_<TaskInstance>(m, "TaskInstance")
        .def_readonly("input", &TaskInstance::input)
        .def_readonly("target", &TaskInstance::target);

    py::class_<TaskDataset>(m, "TaskDataset")
        .def_readonly("name", &TaskDataset::name)
        .def_readonly("task_request", &TaskDataset::task_request)
        .def_readonly("llm_instruction", &TaskDataset::llm_instruction)
        .def_readonly("choices", &TaskDataset::choices)
        .def_readonly("instances", &TaskDataset::instances);

    m.def("load_task", &load_task, py::arg("path"));
    m.def("task_from_json_text", &task_from_json_text, py::arg("json_text"));
    m.def(
        "sample_eval_instances",
        [](const TaskDataset& task, int n, std::uint64_t seed) {
            Rng rng(seed);
            return sample_eval_instances(task, n, rng);
        },
        py::arg("task"), py::arg("n"), py::arg("seed"));
    m.def(
        "instantiate",
        [](const PromptTemplate& tmpl, const TaskDataset& task, int instance_index,
           const std::vector<std::uint64_t>& seeds) {
            InstantiatedPrompt p = instantiate(tmpl, task, instance_index, seeds);
            return py::make_tuple(p.text, p.example_ids);
        },
        py::arg("template"), py::arg("task"), py::arg("instance_index"), py::arg("example_seeds"));
    m.def(
        "reference_prompt_text",
        [](const PromptTemplate& tmpl, const TaskDataset& task,
           const std::vector<std::uint64_t>& seeds) {
            return reference_prompt_text(tmpl, task, seeds);
        },
        py::arg("template"), py::arg("task"), py::arg("example_seeds"));

    // ---- phenotype ----------------------------------------------------------
    py::class_<Phenotype>(m, "Phenotype")
        .def(py::init([](int shots, int word_count, int depth, bool has_context) {
                 return Phenotype{shots, word_count, depth, has_context};
             }),
             py::arg("shots"), py::arg("word_count"), py::arg("depth"), py::arg("has_context"))
        .def_readwrite("shots", &Phenotype::shots)
        .def_readwrite("word_count", &Phenotype::word_count)
        .def_readwrite("depth", &Phenotype::depth)
        .def_readwrite("has_context", &Phenotype::has_context);

    py::class_<BinConfig>(m, "BinConfig")
        .def(py::init([](int shots, int words, int depth) {
                 return BinConfig{shots, words, depth};
             }),
             py::arg("shots_width") = 2, py::arg("words_width") = 25, py::arg("depth_width") = 2)
        .def_readwrite("shots_width", &BinConfig::shots_width)
        .def_readwrite("words_width", &BinConfig::words_width)
        .def_readwrite("depth_width", &BinConfig::depth_width);

    m.def("extract", &extract, py::arg("template"), py::arg("reference_text"));
    m.def(
        "bin_key",
        [](const Phenotype& p, const BinConfig& cfg) {
            BinKey k = bin_key(p, cfg);
            return py::make_tuple(k.shots_bin, k.words_bin, k.depth_bin);
        },
        py::arg("phenotype"), py::arg("bin_config") = BinConfig{});
    m.def("shot_category", [](int shots) { return std::string(to_string(shot_category(shots))); });
    m.def("cot_category", [](int depth) { return std::string(to_string(cot_category(depth))); });
    m.def("type_token_ratio", &type_token_ratio, py::arg("text"));

    // ---- archive ------------------------------------------------------------
    py::class_<Individual>(m, "Individual")
        .def_readonly("id", &Individual::id)
        .def_readonly("genotype", &Individual::genotype)
        .def_readonly("phenotype", &Individual::phenotype)
        .def_readonly("fitness", &Individual::fitness)
        .def_readonly("eval_count", &Individual::eval_count)
        .def_readonly("ttr", &Individual::ttr);

    py::class_<Archive>(m, "Archive")
        .def(py::init<BinConfig>(), py::arg("bin_config") = BinConfig{})
        .def("size", &Archive::size)
        .def("best_fitness", &Archive::best_fitness)
        .def("elites", &Archive::elites)
        .def("to_json_text", [](const Archive& a) { return archive_to_json_text(a); })
        .def(
            "try_insert",
            [](Archive& a, const Individual& ind, int iteration) {
                switch (a.try_insert(ind, iteration)) {
                    case InsertOutcome::Inserted: return "inserted";
                    case InsertOutcome::Replaced: return "replaced";
                    default: return "rejected";
                }
            },
            py::arg("individual"), py::arg("iteration"))
        .def(
            "coverage",
            [](const Archive& a, double min_fitness, const std::vector<int>& universe) {
                return coverage(a, {Axis::Shots, Axis::Depth}, min_fitness, universe);
            },
            py::arg("min_fitness") = 0.55, py::arg("universe") = std::vector<int>{5, 5});

    m.def("load_archive", &load_archive, py::arg("path"));
    m.def("archive_from_json_text", &archive_from_json_text, py::arg("json_text"));

    // ---- evaluation and runs --------------------------------------------------
    m.def(
        "mock_fitness",
        [](const Genotype& g, const TaskDataset& task, const std::vector<int>& indices,
           const std::string& rule, double param, std::uint64_t seed) {
            Grammar grammar = Grammar::default_grammar();
            GenericTables tables = GenericTables::defaults();
            Evaluator ev(mock_config(rule, param, seed));
            FitnessResult fr = ev.fitness(g, task, indices, grammar, tables);
            return py::make_tuple(fr.fitness, fr.outcomes.size());
        },
        py::arg("genotype"), py::arg("task"), py::arg("instance_indices"), py::arg("rule"),
        py::arg("param") = 0.5, py::arg("seed") = 0);
    m.def(
        "match_answer",
        [](const std::string& raw, const std::string& target,
           const std::vector<std::string>& choices) {
            MatchDecision d = match_answer(raw, target, choices);
            return py::make_tuple(d.matched, d.ambiguous);
        },
        py::arg("raw_output"), py::arg("target"), py::arg("choices") = std::vector<std::string>{});

    py::class_<IterationRecord>(m, "IterationRecord")
        .def_readonly("iteration", &IterationRecord::iteration)
        .def_readonly("fitness_min", &IterationRecord::fitness_min)
        .def_readonly("fitness_mean", &IterationRecord::fitness_mean)
        .def_readonly("fitness_max", &IterationRecord::fitness_max)
        .def_readonly("archive_size", &IterationRecord::archive_size)
        .def_readonly("coverage_any", &IterationRecord::coverage_any)
        .def_readonly("coverage_hp", &IterationRecord::coverage_hp);

    py::class_<PyRunResult>(m, "RunResult")
        .def_readonly("archive", &PyRunResult::archive)
        .def_property_readonly("iterations",
                               [](const PyRunResult& r) { return r.log.iterations; })
        .def_property_readonly("total_model_calls",
                               [](const PyRunResult& r) { return r.log.total_model_calls; })
        .def_property_readonly("degraded", [](const PyRunResult& r) { return r.log.degraded; })
        .def("archive_json", [](const PyRunResult& r) { return archive_to_json_text(r.archive); })
        .def("run_log_json",
             [](const PyRunResult& r) { return run_log_to_json_text(r.config, r.log); })
        .def("population_csv",
             [](const PyRunResult& r) { return population_to_csv_text(r.log.population_records); });

    m.def(
        "run",
        [](const TaskDataset& task, const std::string& algorithm, const std::string& mock_rule,
           double mock_param, std::uint64_t mock_seed, int population_size, int num_iterations,
           double mut_rate, double mut_chance, int num_evaluations, std::vector<int> bin_sizes,
           int max_shots, std::uint64_t seed, int parallelism) {
            RunConfig cfg = make_run_config(population_size, num_iterations, mut_rate, mut_chance,
                                            num_evaluations, std::move(bin_sizes), max_shots, seed,
                                            algorithm, parallelism);
            Grammar grammar = Grammar::default_grammar();
            GenericTables tables = GenericTables::defaults();
            Evaluator ev(mock_config(mock_rule, mock_param, mock_seed));
            RunResult rr = cfg.algorithm == Algorithm::MapElites
                               ? run_map_elites(cfg, task, grammar, tables, ev)
                               : run_random_search(cfg, task, grammar, tables, ev);
            return PyRunResult{std::move(rr.archive), std::move(rr.log), cfg};
        },
        py::arg("task"), py::arg("algorithm") = "map-elites",
        py::arg("mock_rule") = "noisy-threshold", py::arg("mock_param") = 0.5,
        py::arg("mock_seed") = 0, py::arg("population_size") = 50, py::arg("num_iterations") = 10,
        py::arg("mut_rate") = 0.40, py::arg("mut_chance") = 0.40, py::arg("num_evaluations") = 50,
        py::arg("bin_sizes") = std::vector<int>{2, 25, 2}, py::arg("max_shots") = 10,
        py::arg("seed") = 0, py::arg("parallelism") = 1,
        "Run MAP-Elites or random search against a mock evaluator.");

    // ---- statistics -----------------------------------------------------------
    py::class_<StatResult>(m, "StatResult")
        .def_readonly("statistic", &StatResult::statistic)
        .def_readonly("p_value", &StatResult::p_value)
        .def_readonly("significant", &StatResult::significant)
        .def_readonly("degenerate", &StatResult::degenerate)
        .def_property_readonly("effect_size", [](const StatResult& s) {
            return s.effect_size ? py::cast(*s.effect_size) : py::none().cast<py::object>();
        });

    m.def(
        "chi_square_2x2_yates",
        [](long a, long b, long c, long d) { return chi_square_2x2_yates({a, b, c, d}); },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"));
    m.def("cramers_v", &cramers_v, py::arg("chi2"), py::arg("n"));
    m.def(
        "spearman",
        [](const std::vector<double>& x, const std::vector<double>& y) { return spearman(x, y); },
        py::arg("x"), py::arg("y"));
    m.def("two_proportion_z", &two_proportion_z, py::arg("k1"), py::arg("n1"), py::arg("k2"),
          py::arg("n2"));
    m.def(
        "coverage_contingency",
        [](const Archive& a, const Archive& b, double threshold, const std::vector<int>& universe) {
            ContingencyTable2x2 t = coverage_contingency(a, b, threshold, universe);
            return py::make_tuple(t.a, t.b, t.c, t.d);
        },
        py::arg("map_archive"), py::arg("random_archive"), py::arg("threshold") = 0.55,
        py::arg("universe") = std::vector<int>{5, 5});
}
