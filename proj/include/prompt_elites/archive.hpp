// SPDX-License-Identifier: Apache-2.0
#ifndef PROMPT_ELITES_ARCHIVE_HPP
#define PROMPT_ELITES_ARCHIVE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prompt_elites/grammar.hpp"
#include "prompt_elites/phenotype.hpp"

namespace prompt_elites {

struct Provenance {
    int iteration = 0;
    std::optional<int> parent_id;
};

struct Individual {
    int id = 0;
    Genotype genotype;
    Phenotype phenotype;
    double fitness = 0.0;
    int eval_count = 0;
    double ttr = 0.0;
    Provenance provenance;
};

enum class InsertOutcome { Inserted, Replaced, Rejected };

struct InsertionEvent {
    int iteration = 0;
    BinKey bin;
    std::optional<double> old_fitness;
    double new_fitness = 0.0;
};

enum class Axis { Shots, Words, Depth };

/// MAP-Elites archive: one elite per bin, replace only on strict fitness
/// improvement. Single writer; snapshot reads.
class Archive {
public:
    explicit Archive(BinConfig cfg = {}) : bin_config_(cfg) {}

    /// Empty bin -> Inserted; strictly better than the incumbent -> Replaced;
    /// otherwise Rejected (ties keep the incumbent). Inserted/Replaced append
    /// to the insertion log.
    InsertOutcome try_insert(const Individual& individual, int iteration);

    /// Snapshot of all elites, ordered by BinKey.
    std::vector<Individual> elites() const;

    const std::map<BinKey, Individual>& cells() const { return cells_; }
    const std::vector<InsertionEvent>& insertion_log() const { return insertion_log_; }
    const BinConfig& bin_config() const { return bin_config_; }
    std::size_t size() const { return cells_.size(); }
    double best_fitness() const;

private:
    BinConfig bin_config_;
    std::map<BinKey, Individual> cells_;
    std::vector<InsertionEvent> insertion_log_;

    friend Archive archive_from_json_text(const std::string&);
};

/// Fraction of the declared universe whose projected cells hold an elite with
/// fitness strictly above min_fitness. `axes` picks the projection;
/// `universe_counts` gives the per-axis bin counts (same order as `axes`).
/// Projected cells outside the universe are not counted.
double coverage(const Archive& archive, const std::vector<Axis>& axes, double min_fitness,
                const std::vector<int>& universe_counts);

/// Distinct in-universe (shots, depth) cells with an elite above threshold;
/// the building block shared by coverage() and the stats module.
int covered_cell_count(const Archive& archive, const std::vector<Axis>& axes, double min_fitness,
                       const std::vector<int>& universe_counts);

// JSON round-trip and an analysis CSV (one row per elite).
std::string archive_to_json_text(const Archive& archive);
Archive archive_from_json_text(const std::string& json_text);
Archive load_archive(const std::string& path);
std::string archive_to_csv_text(const Archive& archive);

}  // namespace prompt_elites

#endif
