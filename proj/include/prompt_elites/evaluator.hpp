// SPDX-License-Identifier: Apache-2.0
//
// Fitness evaluation against a model boundary: either a remote HTTP
// completion endpoint or a deterministic mock rule. Fitness is exactly
// num_correct / num_evaluations, never smoothed.
#ifndef PROMPT_ELITES_EVALUATOR_HPP
#define PROMPT_ELITES_EVALUATOR_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "prompt_elites/grammar.hpp"
#include "prompt_elites/phenotype.hpp"
#include "prompt_elites/tasks.hpp"

namespace prompt_elites {

struct EvalOutcome {
    int instance_index = -1;
    std::string raw_output;
    bool matched = false;
    double latency_ms = 0.0;
    bool transport_failed = false;  // retries exhausted; counted as unmatched
    bool ambiguous = false;         // >= 2 choices prefix-matched the output
};

enum class EvaluatorKind { Remote, Mock };

/// Deterministic offline scoring rules, selected by name:
///   constant       — match probability `param` (default 0.5)
///   zero-shot-only — matched iff shots == 0
///   shots-reward   — match probability grows with the shot category
///   noisy-threshold— per-individual quality band with seeded per-instance noise
///   first-k        — matched iff instance index < `param` (exact-count testing)
struct MockRuleSpec {
    std::string name = "constant";
    double param = 0.5;
    std::uint64_t seed = 0;
};

struct EvaluatorConfig {
    EvaluatorKind kind = EvaluatorKind::Mock;

    // remote
    std::string endpoint;                                // e.g. https://host/model
    std::string token_env = "PROMPT_ELITES_API_TOKEN";   // bearer token source
    int timeout_ms = 30000;
    int retry_budget = 3;                                // retries after the first attempt
    int retry_backoff_ms = 250;                          // doubles per retry
    bool cache_enabled = false;
    std::string cache_dir;

    // shared
    int max_output_tokens = 3;
    double temperature = 0.0;

    // mock
    MockRuleSpec mock_rule;
    std::string mock_output;  // fixed completion returned by complete() in mock mode
};

using MockRule = std::function<bool(const Phenotype&, int instance_index)>;

MockRule make_mock_rule(const MockRuleSpec& spec);

/// Parses "name" or "name:param" (e.g. "constant:0.7") into a rule spec.
MockRuleSpec parse_mock_rule(const std::string& text, std::uint64_t seed);

struct MatchDecision {
    bool matched = false;
    bool ambiguous = false;
};

/// Normalizes both sides (trim, strip surrounding punctuation, lowercase);
/// matched on exact equality, or — when choices are present — when the unique
/// choice in a prefix relation with the output equals the target. Two or more
/// prefix candidates count as unmatched and are flagged ambiguous.
MatchDecision match_answer(std::string_view raw_output, std::string_view target,
                           const std::vector<std::string>& choices);

struct FitnessResult {
    double fitness = 0.0;
    std::vector<EvalOutcome> outcomes;
    int transport_failures = 0;
    int model_calls = 0;
    int cache_hits = 0;
};

class Evaluator {
public:
    explicit Evaluator(EvaluatorConfig config);

    /// One completion, truncated to max_output_tokens whitespace tokens.
    /// Remote failures are retried with exponential backoff up to the retry
    /// budget, then thrown (TimeoutError / HttpError / AuthError).
    std::string complete(const std::string& prompt_text);

    /// Eq. 1 over the given instance indices: instantiate one prompt per
    /// instance, obtain an answer, match it. Remote transport failures
    /// degrade to unmatched outcomes and are tallied. Safe for concurrent
    /// calls on distinct genotypes.
    FitnessResult fitness(const Genotype& genotype, const TaskDataset& task,
                          std::span<const int> instance_indices, const Grammar& grammar,
                          const GenericTables& tables);

    const EvaluatorConfig& config() const { return config_; }
    long total_model_calls() const { return total_calls_.load(); }
    long total_cache_hits() const { return total_cache_hits_.load(); }
    long total_failures() const { return total_failures_.load(); }

private:
    std::string complete_remote(const std::string& prompt_text);
    std::string cache_lookup(const std::string& key);
    void cache_store(const std::string& key, const std::string& value);

    EvaluatorConfig config_;
    MockRule mock_rule_;
    std::mutex cache_mutex_;
    std::unordered_map<std::string, std::string> cache_;
    std::atomic<long> total_calls_{0};
    std::atomic<long> total_cache_hits_{0};
    std::atomic<long> total_failures_{0};
};

/// Free-function form of Eq. 1 for one-off use.
FitnessResult fitness(const Genotype& genotype, const TaskDataset& task,
                      std::span<const int> instance_indices, const EvaluatorConfig& config,
                      const Grammar& grammar, const GenericTables& tables);

}  // namespace prompt_elites

#endif
