// SPDX-License-Identifier: Apache-2.0
//
// Prompt grammar: a small CFG whose derivations encode prompt structures.
// A genotype is the ordered list of production choices taken during a
// depth-first expansion; expanding it yields a PromptTemplate whose
// task-specific placeholders are filled in later against a task dataset.
#ifndef PROMPT_ELITES_GRAMMAR_HPP
#define PROMPT_ELITES_GRAMMAR_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "prompt_elites/random.hpp"

namespace prompt_elites {

/// Task-specific placeholder kinds ([[...]] tokens). Resolved at
/// instantiation time against a task dataset.
enum class TaskSlot { Example, TaskEntry, LlmInstruction, TaskRequest };

const char* task_slot_marker(TaskSlot slot);

/// One element of a production right-hand side.
struct Atom {
    enum class Kind { Nonterminal, Text, GenericSlot, TaskSlot };
    Kind kind;
    std::string text;       // nonterminal name, literal text, or generic slot name (e.g. "c7")
    TaskSlot slot = TaskSlot::Example;  // meaningful only for Kind::TaskSlot
};

using Production = std::vector<Atom>;

/// Context-free grammar with ordered productions per nonterminal.
/// Literal strings given to add_rule may embed ((name)) generic slots and
/// [[example]] / [[task entry]] / [[LLM instruction]] / [[task request]]
/// task slots; they are split into atoms on construction.
class Grammar {
public:
    void add_rule(const std::string& nonterminal, const std::vector<std::string>& rhs);

    bool has_nonterminal(const std::string& name) const { return raw_rules_.count(name) > 0; }
    const std::vector<Production>& productions(const std::string& nonterminal) const;
    const std::vector<std::string>& nonterminal_order() const { return order_; }
    const std::string& start_symbol() const { return start_; }
    void set_start(std::string s) { start_ = std::move(s); }

    /// Minimum number of [[example]] slots any derivation of `nonterminal`
    /// must emit (fixpoint over the rules; recursion-safe).
    int min_examples(const std::string& nonterminal) const;
    int min_examples(const Production& production) const;

    /// The prompt grammar used throughout:
    ///   P -> S T E I | S E I | C S T E I | C S E I
    ///   S -> R X | R
    ///   X -> "Consider this example:" [[example]]
    ///      | "Consider these examples:" [[example]] N
    ///   N -> [[example]] | [[example]] N
    ///   E -> [[task entry]]   I -> [[LLM instruction]]   R -> [[task request]]
    ///   C -> ((c1)) .. ((c10))   T -> ((t1)) .. ((t10))
    static Grammar default_grammar();

    /// Same shape as default_grammar, loaded from JSON:
    ///   { "start": "P", "rules": { "P": [["S","T","E","I"], ...], ... } }
    /// RHS entries naming a rule key are nonterminals; anything else is a
    /// literal (placeholder markers allowed inside).
    static Grammar from_json_text(const std::string& json_text);
    static Grammar load_file(const std::string& path);

private:
    // Rules are kept raw until first query so that RHS entries can reference
    // nonterminals defined later; compile() resolves names vs. literals.
    void compile() const;

    std::string start_ = "P";
    std::vector<std::string> order_;
    std::unordered_map<std::string, std::vector<std::vector<std::string>>> raw_rules_;
    mutable bool compiled_ = false;
    mutable std::unordered_map<std::string, std::vector<Production>> rules_;
    mutable std::unordered_map<std::string, int> min_examples_cache_;
};

/// Instantiation texts for the generic ((c*)) and ((t*)) slots. The shipped
/// defaults are placeholders of convenience, not a fixed vocabulary — replace
/// them wholesale via JSON ({"contexts": [10 texts], "thoughts": [10 texts]}).
/// Thought entry i (1-based) requests a reasoning depth of i steps.
struct GenericTables {
    std::vector<std::string> contexts;
    std::vector<std::string> thoughts;

    const std::string& resolve(const std::string& slot_name) const;

    static GenericTables defaults();
    static GenericTables from_json_text(const std::string& json_text);
    static GenericTables load_file(const std::string& path);
};

/// One production choice: which rule fired for a nonterminal.
struct Choice {
    std::string symbol;
    int rule_index = 0;
    bool operator==(const Choice&) const = default;
};

/// The unit of evolution: production choices in depth-first expansion order,
/// plus one identity seed per [[example]] slot so that the concrete shot
/// content is a reproducible property of the genotype.
struct Genotype {
    std::vector<Choice> choices;
    std::vector<std::uint64_t> example_seeds;
    bool operator==(const Genotype&) const = default;
};

/// A fragment of an expanded template: literal text or an unresolved
/// task-specific placeholder. Generic slots are already resolved.
struct TemplateFragment {
    bool is_placeholder = false;
    TaskSlot slot = TaskSlot::Example;
    std::string text;  // literal text, or the marker for placeholders
};

struct StructureSummary {
    int shots = 0;
    int depth = 0;           // 0 = no thought directive
    bool has_context = false;
};

struct PromptTemplate {
    std::vector<TemplateFragment> fragments;
    StructureSummary summary;
};

struct ValidationIssue {
    enum class Reason { ChoiceUnderflow, ChoiceOverflow, IndexOutOfRange, SymbolMismatch };
    Reason reason;
    std::size_t position = 0;    // index into the choice list
    std::string nonterminal;
    std::string message;
};

struct ValidationResult {
    bool ok = true;
    std::optional<ValidationIssue> issue;
    explicit operator bool() const { return ok; }
};

const char* to_string(ValidationIssue::Reason r);

/// Replays the genotype depth-first and builds the template. Generic slots
/// are resolved from `tables`; the structure summary counts [[example]]
/// slots, records the T choice's one-based depth, and flags C usage.
/// Throws GrammarError on underflow/overflow/out-of-range choices.
PromptTemplate expand(const Genotype& genotype, const Grammar& grammar, const GenericTables& tables);

/// Non-throwing replay check: consumes exactly the choice list, all indices
/// in range, recorded symbols matching the derivation.
ValidationResult validate(const Genotype& genotype, const Grammar& grammar);

/// Samples a genotype by choosing uniformly at each expansion step among the
/// productions that still fit the example budget. The budget is
/// max(1, max_shots): S stays uniform, so drawing S -> R X can always place
/// at least one example even when max_shots is 0.
Genotype random_genotype(const Grammar& grammar, Rng& rng, int max_shots);

/// Per-locus mutation. Loci: the C index, the T index, the shot count
/// (rebuilds the S/X/N subtree for a fresh count in 0..max_shots), and each
/// example slot seed. Each is independently re-sampled with probability
/// mut_chance; everything else is preserved bit-exactly.
Genotype mutate(const Genotype& genotype, double mut_chance, Rng& rng, const Grammar& grammar,
                int max_shots);

}  // namespace prompt_elites

#endif
