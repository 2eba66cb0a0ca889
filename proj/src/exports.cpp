// SPDX-License-Identifier: Apache-2.0
#include "prompt_elites/exports.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "prompt_elites/csv.hpp"
#include "prompt_elites/errors.hpp"

namespace prompt_elites {

std::string run_log_to_json_text(const RunConfig& cfg, const RunLog& log) {
    using ordered_json = nlohmann::ordered_json;
    ordered_json doc;
    doc["task"] = log.task_name;
    doc["algorithm"] = log.algorithm_name;
    doc["model"] = log.model_tag;
    doc["config"] = {{"population_size", cfg.population_size},
                     {"num_iterations", cfg.num_iterations},
                     {"mut_rate", cfg.mut_rate},
                     {"mut_chance", cfg.mut_chance},
                     {"num_evaluations", cfg.num_evaluations},
                     {"bin_sizes", {cfg.bin_config.shots_width, cfg.bin_config.words_width,
                                    cfg.bin_config.depth_width}},
                     {"max_shots", cfg.max_shots},
                     {"seed", cfg.seed},
                     {"parallelism", cfg.parallelism},
                     {"hp_threshold", cfg.hp_threshold},
                     {"coverage_universe", cfg.coverage_universe}};
    ordered_json iterations = ordered_json::array();
    for (const IterationRecord& rec : log.iterations) {
        iterations.push_back({{"iteration", rec.iteration},
                              {"fitness_min", rec.fitness_min},
                              {"fitness_mean", rec.fitness_mean},
                              {"fitness_max", rec.fitness_max},
                              {"archive_size", rec.archive_size},
                              {"coverage_any", rec.coverage_any},
                              {"coverage_hp", rec.coverage_hp},
                              {"insertions", rec.insertions},
                              {"evaluator_failures", rec.evaluator_failures}});
    }
    doc["iterations"] = std::move(iterations);
    doc["total_model_calls"] = log.total_model_calls;
    doc["total_cache_hits"] = log.total_cache_hits;
    doc["total_failures"] = log.total_failures;
    doc["degraded"] = log.degraded;
    return doc.dump(2) + "\n";
}

std::string population_to_csv_text(std::span<const Individual> individuals) {
    CsvWriter csv;
    csv.row({"id", "iteration", "parent", "shots", "word_count", "depth", "has_context", "ttr",
             "fitness"});
    for (const Individual& ind : individuals) {
        csv.row({std::to_string(ind.id), std::to_string(ind.provenance.iteration),
                 ind.provenance.parent_id ? std::to_string(*ind.provenance.parent_id) : "",
                 std::to_string(ind.phenotype.shots), std::to_string(ind.phenotype.word_count),
                 std::to_string(ind.phenotype.depth), ind.phenotype.has_context ? "1" : "0",
                 format_double(ind.ttr), format_double(ind.fitness)});
    }
    return csv.str();
}

std::vector<PopulationRow> population_from_csv_text(const std::string& csv_text) {
    auto rows = parse_csv(csv_text);
    if (rows.empty()) throw SchemaError("header", "population CSV is empty");
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < rows[0].size(); ++i) column[rows[0][i]] = i;
    for (const char* required : {"shots", "word_count", "depth", "has_context", "ttr", "fitness"}) {
        if (!column.count(required)) throw SchemaError(required, "missing population CSV column");
    }
    std::vector<PopulationRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& fields = rows[r];
        auto get = [&](const char* name) -> const std::string& {
            std::size_t idx = column.at(name);
            if (idx >= fields.size())
                throw SchemaError(name, "row " + std::to_string(r) + " too short");
            return fields[idx];
        };
        try {
            PopulationRow row;
            row.shots = std::stoi(get("shots"));
            row.word_count = std::stoi(get("word_count"));
            row.depth = std::stoi(get("depth"));
            row.has_context = get("has_context") == "1" || get("has_context") == "true";
            row.ttr = std::stod(get("ttr"));
            row.fitness = std::stod(get("fitness"));
            out.push_back(row);
        } catch (const std::invalid_argument&) {
            throw SchemaError("row " + std::to_string(r), "non-numeric field");
        }
    }
    return out;
}

std::vector<PopulationRow> load_population(const std::string& path) {
    return population_from_csv_text(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
}

}  // namespace prompt_elites
