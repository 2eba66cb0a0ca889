// SPDX-License-Identifier: Apache-2.0
#include "prompt_elites/archive.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "prompt_elites/csv.hpp"
#include "prompt_elites/errors.hpp"

namespace prompt_elites {

InsertOutcome Archive::try_insert(const Individual& individual, int iteration) {
    if (individual.eval_count < 1) throw ConfigError("cannot insert an unevaluated individual");
    BinKey key = bin_key(individual.phenotype, bin_config_);
    auto it = cells_.find(key);
    if (it == cells_.end()) {
        cells_.emplace(key, individual);
        insertion_log_.push_back({iteration, key, std::nullopt, individual.fitness});
        return InsertOutcome::Inserted;
    }
    if (individual.fitness > it->second.fitness) {
        insertion_log_.push_back({iteration, key, it->second.fitness, individual.fitness});
        it->second = individual;
        return InsertOutcome::Replaced;
    }
    return InsertOutcome::Rejected;
}

std::vector<Individual> Archive::elites() const {
    std::vector<Individual> out;
    out.reserve(cells_.size());
    for (const auto& [key, individual] : cells_) out.push_back(individual);
    return out;
}

double Archive::best_fitness() const {
    double best = 0.0;
    for (const auto& [key, individual] : cells_) best = std::max(best, individual.fitness);
    return best;
}

namespace {

int axis_value(const BinKey& key, Axis axis) {
    switch (axis) {
        case Axis::Shots: return key.shots_bin;
        case Axis::Words: return key.words_bin;
        case Axis::Depth: return key.depth_bin;
    }
    return 0;
}

}  // namespace

int covered_cell_count(const Archive& archive, const std::vector<Axis>& axes, double min_fitness,
                       const std::vector<int>& universe_counts) {
    if (axes.empty() || axes.size() != universe_counts.size())
        throw ConfigError("coverage needs one universe size per projection axis");
    std::set<std::vector<int>> covered;
    for (const auto& [key, individual] : archive.cells()) {
        if (!(individual.fitness > min_fitness)) continue;
        std::vector<int> cell;
        bool inside = true;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            int v = axis_value(key, axes[i]);
            if (v < 0 || v >= universe_counts[i]) { inside = false; break; }
            cell.push_back(v);
        }
        if (inside) covered.insert(std::move(cell));
    }
    return static_cast<int>(covered.size());
}

double coverage(const Archive& archive, const std::vector<Axis>& axes, double min_fitness,
                const std::vector<int>& universe_counts) {
    long total = 1;
    for (int n : universe_counts) {
        if (n < 1) throw ConfigError("universe sizes must be >= 1");
        total *= n;
    }
    return static_cast<double>(covered_cell_count(archive, axes, min_fitness, universe_counts)) /
           static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json genotype_to_json(const Genotype& g) {
    ordered_json choices = ordered_json::array();
    for (const Choice& c : g.choices) choices.push_back(ordered_json::array({c.symbol, c.rule_index}));
    return ordered_json{{"choices", std::move(choices)}, {"example_seeds", g.example_seeds}};
}

Genotype genotype_from_json(const ordered_json& j) {
    Genotype g;
    if (!j.contains("choices") || !j["choices"].is_array())
        throw SchemaError("genotype.choices", "required array");
    for (const auto& entry : j["choices"]) {
        if (!entry.is_array() || entry.size() != 2)
            throw SchemaError("genotype.choices", "each choice is [symbol, rule_index]");
        g.choices.push_back({entry[0].get<std::string>(), entry[1].get<int>()});
    }
    if (j.contains("example_seeds"))
        for (const auto& s : j["example_seeds"]) g.example_seeds.push_back(s.get<std::uint64_t>());
    return g;
}

ordered_json phenotype_to_json(const Phenotype& p) {
    return ordered_json{{"shots", p.shots},
                        {"word_count", p.word_count},
                        {"depth", p.depth},
                        {"has_context", p.has_context}};
}

Phenotype phenotype_from_json(const ordered_json& j) {
    Phenotype p;
    p.shots = j.at("shots").get<int>();
    p.word_count = j.at("word_count").get<int>();
    p.depth = j.at("depth").get<int>();
    p.has_context = j.at("has_context").get<bool>();
    return p;
}

}  // namespace

std::string archive_to_json_text(const Archive& archive) {
    ordered_json doc;
    doc["bin_config"] = {{"shots", archive.bin_config().shots_width},
                         {"words", archive.bin_config().words_width},
                         {"depth", archive.bin_config().depth_width}};
    ordered_json cells = ordered_json::array();
    for (const auto& [key, ind] : archive.cells()) {
        ordered_json cell;
        cell["bin"] = {key.shots_bin, key.words_bin, key.depth_bin};
        cell["id"] = ind.id;
        cell["genotype"] = genotype_to_json(ind.genotype);
        cell["phenotype"] = phenotype_to_json(ind.phenotype);
        cell["fitness"] = ind.fitness;
        cell["eval_count"] = ind.eval_count;
        cell["ttr"] = ind.ttr;
        cell["iteration"] = ind.provenance.iteration;
        if (ind.provenance.parent_id)
            cell["parent"] = *ind.provenance.parent_id;
        else
            cell["parent"] = nullptr;
        cells.push_back(std::move(cell));
    }
    doc["cells"] = std::move(cells);
    ordered_json log = ordered_json::array();
    for (const InsertionEvent& e : archive.insertion_log()) {
        ordered_json entry;
        entry["iteration"] = e.iteration;
        entry["bin"] = {e.bin.shots_bin, e.bin.words_bin, e.bin.depth_bin};
        if (e.old_fitness)
            entry["old"] = *e.old_fitness;
        else
            entry["old"] = nullptr;
        entry["new"] = e.new_fitness;
        log.push_back(std::move(entry));
    }
    doc["insertion_log"] = std::move(log);
    return doc.dump(2) + "\n";
}

Archive archive_from_json_text(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("archive JSON: ") + e.what());
    }
    if (!doc.contains("bin_config")) throw SchemaError("bin_config", "missing");
    BinConfig cfg;
    cfg.shots_width = doc["bin_config"].at("shots").get<int>();
    cfg.words_width = doc["bin_config"].at("words").get<int>();
    cfg.depth_width = doc["bin_config"].at("depth").get<int>();
    Archive archive(cfg);
    if (!doc.contains("cells") || !doc["cells"].is_array()) throw SchemaError("cells", "required array");
    for (const auto& cell : doc["cells"]) {
        Individual ind;
        ind.id = cell.value("id", 0);
        ind.genotype = genotype_from_json(cell.at("genotype"));
        ind.phenotype = phenotype_from_json(cell.at("phenotype"));
        ind.fitness = cell.at("fitness").get<double>();
        ind.eval_count = cell.value("eval_count", 1);
        ind.ttr = cell.value("ttr", 0.0);
        ind.provenance.iteration = cell.value("iteration", 0);
        if (cell.contains("parent") && !cell["parent"].is_null())
            ind.provenance.parent_id = cell["parent"].get<int>();
        BinKey key = bin_key(ind.phenotype, cfg);
        const auto& stored_bin = cell.at("bin");
        if (stored_bin.size() != 3 || stored_bin[0].get<int>() != key.shots_bin ||
            stored_bin[1].get<int>() != key.words_bin || stored_bin[2].get<int>() != key.depth_bin)
            throw SchemaError("bin", "stored bin disagrees with phenotype/bin_config");
        archive.cells_.emplace(key, std::move(ind));
    }
    if (doc.contains("insertion_log")) {
        for (const auto& entry : doc["insertion_log"]) {
            InsertionEvent e;
            e.iteration = entry.at("iteration").get<int>();
            e.bin = {entry.at("bin")[0].get<int>(), entry.at("bin")[1].get<int>(),
                     entry.at("bin")[2].get<int>()};
            if (!entry.at("old").is_null()) e.old_fitness = entry["old"].get<double>();
            e.new_fitness = entry.at("new").get<double>();
            archive.insertion_log_.push_back(e);
        }
    }
    return archive;
}

Archive load_archive(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read archive file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return archive_from_json_text(buf.str());
}

std::string archive_to_csv_text(const Archive& archive) {
    CsvWriter csv;
    csv.row({"shots_bin", "words_bin", "depth_bin", "shots", "word_count", "depth", "has_context",
             "fitness", "ttr", "iteration", "id"});
    for (const auto& [key, ind] : archive.cells()) {
        csv.row({std::to_string(key.shots_bin), std::to_string(key.words_bin),
                 std::to_string(key.depth_bin), std::to_string(ind.phenotype.shots),
                 std::to_string(ind.phenotype.word_count), std::to_string(ind.phenotype.depth),
                 ind.phenotype.has_context ? "1" : "0", format_double(ind.fitness),
                 format_double(ind.ttr), std::to_string(ind.provenance.iteration),
                 std::to_string(ind.id)});
    }
    return csv.str();
}

}  // namespace prompt_elites
