// SPDX-License-Identifier: Apache-2.0
#include "prompt_elites/grammar.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "prompt_elites/errors.hpp"
#include "prompt_elites/text.hpp"

namespace prompt_elites {

namespace {

constexpr int kUnbounded = std::numeric_limits<int>::max() / 4;

std::optional<TaskSlot> task_slot_from_name(std::string_view name) {
    if (name == "example") return TaskSlot::Example;
    if (name == "task entry") return TaskSlot::TaskEntry;
    if (name == "LLM instruction") return TaskSlot::LlmInstruction;
    if (name == "task request") return TaskSlot::TaskRequest;
    return std::nullopt;
}

// Splits a literal into text / ((generic)) / [[task]] atoms. Text runs are
// trimmed; empty runs are dropped.
void split_literal(const std::string& literal, Production& out) {
    auto push_text = [&out](std::string_view run) {
        while (!run.empty() && is_space_char(run.front())) run.remove_prefix(1);
        while (!run.empty() && is_space_char(run.back())) run.remove_suffix(1);
        if (!run.empty()) out.push_back({Atom::Kind::Text, std::string(run)});
    };
    std::string_view rest = literal;
    while (!rest.empty()) {
        std::size_t gp = rest.find("((");
        std::size_t tp = rest.find("[[");
        std::size_t next = std::min(gp, tp);
        if (next == std::string_view::npos) {
            push_text(rest);
            break;
        }
        push_text(rest.substr(0, next));
        const bool generic = next == gp;
        const char* close = generic ? "))" : "]]";
        std::size_t end = rest.find(close, next + 2);
        if (end == std::string_view::npos)
            throw ConfigError("unterminated placeholder in literal: " + literal);
        std::string inner(rest.substr(next + 2, end - next - 2));
        if (generic) {
            out.push_back({Atom::Kind::GenericSlot, inner});
        } else {
            auto slot = task_slot_from_name(inner);
            if (!slot) throw ConfigError("unknown task placeholder [[" + inner + "]]");
            out.push_back({Atom::Kind::TaskSlot, "[[" + inner + "]]", *slot});
        }
        rest.remove_prefix(end + 2);
    }
}

}  // namespace

const char* task_slot_marker(TaskSlot slot) {
    switch (slot) {
        case TaskSlot::Example: return "[[example]]";
        case TaskSlot::TaskEntry: return "[[task entry]]";
        case TaskSlot::LlmInstruction: return "[[LLM instruction]]";
        case TaskSlot::TaskRequest: return "[[task request]]";
    }
    return "";
}

const char* to_string(ValidationIssue::Reason r) {
    switch (r) {
        case ValidationIssue::Reason::ChoiceUnderflow: return "ChoiceUnderflow";
        case ValidationIssue::Reason::ChoiceOverflow: return "ChoiceOverflow";
        case ValidationIssue::Reason::IndexOutOfRange: return "IndexOutOfRange";
        case ValidationIssue::Reason::SymbolMismatch: return "SymbolMismatch";
    }
    return "";
}

void Grammar::add_rule(const std::string& nonterminal, const std::vector<std::string>& rhs) {
    auto [it, fresh] = raw_rules_.try_emplace(nonterminal);
    if (fresh) order_.push_back(nonterminal);
    it->second.push_back(rhs);
    compiled_ = false;
}

void Grammar::compile() const {
    rules_.clear();
    for (const auto& name : order_) {
        std::vector<Production> prods;
        for (const auto& raw : raw_rules_.at(name)) {
            Production p;
            for (const auto& entry : raw) {
                if (raw_rules_.count(entry)) {
                    p.push_back({Atom::Kind::Nonterminal, entry});
                } else {
                    split_literal(entry, p);
                }
            }
            prods.push_back(std::move(p));
        }
        if (prods.empty()) throw ConfigError("nonterminal without productions: " + name);
        rules_.emplace(name, std::move(prods));
    }
    min_examples_cache_.clear();
    compiled_ = true;
}

const std::vector<Production>& Grammar::productions(const std::string& nonterminal) const {
    if (!compiled_) compile();
    auto it = rules_.find(nonterminal);
    if (it == rules_.end()) throw GrammarError("unknown nonterminal: " + nonterminal);
    return it->second;
}

int Grammar::min_examples(const Production& production) const {
    int total = 0;
    for (const Atom& atom : production) {
        if (atom.kind == Atom::Kind::TaskSlot && atom.slot == TaskSlot::Example) {
            total += 1;
        } else if (atom.kind == Atom::Kind::Nonterminal) {
            total += min_examples(atom.text);
        }
        if (total >= kUnbounded) return kUnbounded;
    }
    return total;
}

int Grammar::min_examples(const std::string& nonterminal) const {
    if (!compiled_) compile();
    if (min_examples_cache_.empty()) {
        // Fixpoint from "unbounded": recursive productions settle once their
        // terminating alternative is priced.
        for (const auto& name : order_) min_examples_cache_[name] = kUnbounded;
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& name : order_) {
                int best = kUnbounded;
                for (const Production& p : rules_.at(name)) best = std::min(best, min_examples(p));
                if (best < min_examples_cache_[name]) {
                    min_examples_cache_[name] = best;
                    changed = true;
                }
            }
        }
    }
    auto it = min_examples_cache_.find(nonterminal);
    if (it == min_examples_cache_.end()) throw GrammarError("unknown nonterminal: " + nonterminal);
    return it->second;
}

Grammar Grammar::default_grammar() {
    Grammar g;
    g.set_start("P");
    g.add_rule("P", {"S", "T", "E", "I"});
    g.add_rule("P", {"S", "E", "I"});
    g.add_rule("P", {"C", "S", "T", "E", "I"});
    g.add_rule("P", {"C", "S", "E", "I"});
    g.add_rule("S", {"R", "X"});
    g.add_rule("S", {"R"});
    g.add_rule("X", {"Consider this example: [[example]]"});
    g.add_rule("X", {"Consider these examples: [[example]]", "N"});
    g.add_rule("N", {"[[example]]"});
    g.add_rule("N", {"[[example]]", "N"});
    g.add_rule("E", {"[[task entry]]"});
    g.add_rule("I", {"[[LLM instruction]]"});
    g.add_rule("R", {"[[task request]]"});
    for (int i = 1; i <= 10; ++i) g.add_rule("C", {"((c" + std::to_string(i) + "))"});
    for (int i = 1; i <= 10; ++i) g.add_rule("T", {"((t" + std::to_string(i) + "))"});
    return g;
}

Grammar Grammar::from_json_text(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("grammar JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_object())
        throw SchemaError("rules", "grammar JSON needs an object of rule lists");
    Grammar g;
    g.set_start(doc.value("start", std::string("P")));
    for (const auto& [name, prods] : doc["rules"].items()) {
        if (!prods.is_array() || prods.empty()) throw SchemaError(name, "expected a non-empty array of productions");
        for (const auto& prod : prods) {
            if (!prod.is_array()) throw SchemaError(name, "each production must be an array of strings");
            std::vector<std::string> rhs;
            for (const auto& entry : prod) rhs.push_back(entry.get<std::string>());
            g.add_rule(name, rhs);
        }
    }
    if (!g.raw_rules_.count(g.start_symbol())) throw SchemaError("start", "start symbol has no rules");
    return g;
}

Grammar Grammar::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read grammar file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

// ---------------------------------------------------------------------------
// GenericTables

GenericTables GenericTables::defaults() {
    GenericTables t;
    t.contexts = {
        "You are a researcher presenting your findings at a scientific conference, answering "
        "questions from fellow scientists.",
        "You are a patient teacher walking a student through an exam question, making sure the "
        "final answer is stated clearly.",
        "You are a meticulous fact-checker at a newspaper, verifying claims before publication.",
        "You are a seasoned detective reasoning carefully about the evidence in front of you.",
        "You are a reference librarian helping a visitor find a precise and reliable answer.",
        "You are an engineer reviewing a design document and answering questions about it.",
        "You are a judge weighing the arguments of a case before delivering a concise verdict.",
        "You are a quiz show contestant who answers quickly, confidently, and accurately.",
        "You are an experienced editor resolving questions about a manuscript's content.",
        "You are a tutor preparing a pupil for a test, emphasizing correct and direct answers.",
    };
    for (int i = 1; i <= 10; ++i) {
        t.thoughts.push_back("Think step by step. The number of steps you must consider is " +
                             std::to_string(i) + ".");
    }
    return t;
}

const std::string& GenericTables::resolve(const std::string& slot_name) const {
    if (slot_name.size() >= 2 && (slot_name[0] == 'c' || slot_name[0] == 't')) {
        int index = 0;
        for (std::size_t i = 1; i < slot_name.size(); ++i) {
            char c = slot_name[i];
            if (c < '0' || c > '9') { index = -1; break; }
            index = index * 10 + (c - '0');
        }
        const auto& table = slot_name[0] == 'c' ? contexts : thoughts;
        if (index >= 1 && static_cast<std::size_t>(index) <= table.size())
            return table[static_cast<std::size_t>(index) - 1];
    }
    throw ConfigError("unresolvable generic placeholder ((" + slot_name + "))");
}

GenericTables GenericTables::from_json_text(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tables JSON: ") + e.what());
    }
    GenericTables t;
    for (const char* key : {"contexts", "thoughts"}) {
        if (!doc.contains(key) || !doc[key].is_array())
            throw SchemaError(key, "expected an array of 10 strings");
        auto& dst = std::string(key) == "contexts" ? t.contexts : t.thoughts;
        for (const auto& entry : doc[key]) dst.push_back(entry.get<std::string>());
        if (dst.size() != 10) throw SchemaError(key, "expected exactly 10 entries");
    }
    return t;
}

GenericTables GenericTables::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read tables file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

// ---------------------------------------------------------------------------
// Replay (shared by expand / validate)

namespace {

struct Replay {
    const Genotype& genotype;
    const Grammar& grammar;
    const GenericTables* tables;  // null when only checking
    PromptTemplate out;
    std::size_t cursor = 0;
    std::optional<ValidationIssue> issue;

    bool fail(ValidationIssue::Reason reason, std::size_t pos, const std::string& nt) {
        std::ostringstream msg;
        msg << to_string(reason) << " at choice " << pos << " (nonterminal " << nt << ")";
        issue = ValidationIssue{reason, pos, nt, msg.str()};
        return false;
    }

    bool expand_symbol(const std::string& name) {
        const auto& prods = grammar.productions(name);
        if (cursor >= genotype.choices.size())
            return fail(ValidationIssue::Reason::ChoiceUnderflow, cursor, name);
        const Choice& choice = genotype.choices[cursor];
        if (choice.symbol != name)
            return fail(ValidationIssue::Reason::SymbolMismatch, cursor, name);
        if (choice.rule_index < 0 || static_cast<std::size_t>(choice.rule_index) >= prods.size())
            return fail(ValidationIssue::Reason::IndexOutOfRange, cursor, name);
        ++cursor;
        if (name == "C") out.summary.has_context = true;
        if (name == "T") out.summary.depth = choice.rule_index + 1;
        for (const Atom& atom : prods[static_cast<std::size_t>(choice.rule_index)]) {
            switch (atom.kind) {
                case Atom::Kind::Nonterminal:
                    if (!expand_symbol(atom.text)) return false;
                    break;
                case Atom::Kind::Text:
                    if (tables) out.fragments.push_back({false, TaskSlot::Example, atom.text});
                    break;
                case Atom::Kind::GenericSlot:
                    if (tables)
                        out.fragments.push_back({false, TaskSlot::Example, tables->resolve(atom.text)});
                    break;
                case Atom::Kind::TaskSlot:
                    if (atom.slot == TaskSlot::Example) ++out.summary.shots;
                    if (tables) out.fragments.push_back({true, atom.slot, atom.text});
                    break;
            }
        }
        return true;
    }

    bool run() {
        if (!expand_symbol(grammar.start_symbol())) return false;
        if (cursor != genotype.choices.size())
            return fail(ValidationIssue::Reason::ChoiceOverflow, cursor,
                        genotype.choices[cursor].symbol);
        return true;
    }
};

}  // namespace

PromptTemplate expand(const Genotype& genotype, const Grammar& grammar, const GenericTables& tables) {
    Replay replay{genotype, grammar, &tables};
    if (!replay.run()) throw GrammarError(replay.issue->message);
    return std::move(replay.out);
}

ValidationResult validate(const Genotype& genotype, const Grammar& grammar) {
    Replay replay{genotype, grammar, nullptr};
    if (!replay.run()) return {false, replay.issue};
    return {};
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

void sample_symbol(const Grammar& grammar, Rng& rng, const std::string& name, int cap,
                   int& example_count, Genotype& out) {
    const auto& prods = grammar.productions(name);
    std::vector<int> allowed;
    for (std::size_t i = 0; i < prods.size(); ++i) {
        if (example_count + grammar.min_examples(prods[i]) <= cap)
            allowed.push_back(static_cast<int>(i));
    }
    if (allowed.empty()) {
        // Budget already exceeded by an enclosing commitment: take the
        // cheapest alternative so the derivation still terminates.
        int best = 0, best_cost = kUnbounded;
        for (std::size_t i = 0; i < prods.size(); ++i) {
            int cost = grammar.min_examples(prods[i]);
            if (cost < best_cost) { best_cost = cost; best = static_cast<int>(i); }
        }
        allowed.push_back(best);
    }
    int choice = allowed[rng.uniform_index(allowed.size())];
    out.choices.push_back({name, choice});
    for (const Atom& atom : prods[static_cast<std::size_t>(choice)]) {
        if (atom.kind == Atom::Kind::Nonterminal) {
            sample_symbol(grammar, rng, atom.text, cap, example_count, out);
        } else if (atom.kind == Atom::Kind::TaskSlot && atom.slot == TaskSlot::Example) {
            ++example_count;
            out.example_seeds.push_back(rng.next_u64());
        }
    }
}

}  // namespace

Genotype random_genotype(const Grammar& grammar, Rng& rng, int max_shots) {
    if (max_shots < 0) throw ConfigError("max_shots must be >= 0");
    Genotype g;
    int count = 0;
    sample_symbol(grammar, rng, grammar.start_symbol(), std::max(1, max_shots), count, g);
    return g;
}

// ---------------------------------------------------------------------------
// Mutation

namespace {

// End of the subtree rooted at choices[pos]; counts [[example]] atoms emitted.
std::size_t subtree_walk(const Grammar& grammar, const std::vector<Choice>& choices,
                         std::size_t pos, int& examples) {
    const Choice& ch = choices[pos];
    const Production& prod =
        grammar.productions(ch.symbol)[static_cast<std::size_t>(ch.rule_index)];
    std::size_t cur = pos + 1;
    for (const Atom& atom : prod) {
        if (atom.kind == Atom::Kind::Nonterminal) {
            cur = subtree_walk(grammar, choices, cur, examples);
        } else if (atom.kind == Atom::Kind::TaskSlot && atom.slot == TaskSlot::Example) {
            ++examples;
        }
    }
    return cur;
}

// The shot-count locus rebuilds the S/X/N subtree; that only makes sense if
// the grammar keeps the stock shape (S -> R X | R; X one/multi; N term/rec).
bool has_stock_shot_shape(const Grammar& g) {
    if (!g.has_nonterminal("S") || !g.has_nonterminal("X") || !g.has_nonterminal("N") ||
        !g.has_nonterminal("R"))
        return false;
    return g.productions("S").size() == 2 && g.productions("X").size() == 2 &&
           g.productions("N").size() == 2 && g.productions("R").size() == 1;
}

std::vector<Choice> shot_subtree_choices(int shots) {
    std::vector<Choice> out;
    if (shots == 0) {
        out.push_back({"S", 1});
        out.push_back({"R", 0});
        return out;
    }
    out.push_back({"S", 0});
    out.push_back({"R", 0});
    if (shots == 1) {
        out.push_back({"X", 0});
        return out;
    }
    out.push_back({"X", 1});
    for (int i = 0; i < shots - 2; ++i) out.push_back({"N", 1});
    out.push_back({"N", 0});
    return out;
}

}  // namespace

Genotype mutate(const Genotype& genotype, double mut_chance, Rng& rng, const Grammar& grammar,
                int max_shots) {
    if (mut_chance < 0.0 || mut_chance > 1.0) throw ConfigError("mut_chance must be in [0,1]");
    if (auto v = validate(genotype, grammar); !v) throw GrammarError(v.issue->message);

    Genotype out = genotype;
    std::ptrdiff_t c_pos = -1, t_pos = -1, s_pos = -1;
    for (std::size_t i = 0; i < out.choices.size(); ++i) {
        const std::string& sym = out.choices[i].symbol;
        if (sym == "C" && c_pos < 0) c_pos = static_cast<std::ptrdiff_t>(i);
        if (sym == "T" && t_pos < 0) t_pos = static_cast<std::ptrdiff_t>(i);
        if (sym == "S" && s_pos < 0) s_pos = static_cast<std::ptrdiff_t>(i);
    }

    if (c_pos >= 0 && rng.bernoulli(mut_chance)) {
        out.choices[static_cast<std::size_t>(c_pos)].rule_index =
            static_cast<int>(rng.uniform_index(grammar.productions("C").size()));
    }
    if (t_pos >= 0 && rng.bernoulli(mut_chance)) {
        out.choices[static_cast<std::size_t>(t_pos)].rule_index =
            static_cast<int>(rng.uniform_index(grammar.productions("T").size()));
    }
    if (s_pos >= 0 && has_stock_shot_shape(grammar) && rng.bernoulli(mut_chance)) {
        int old_shots = 0;
        std::size_t s_end =
            subtree_walk(grammar, out.choices, static_cast<std::size_t>(s_pos), old_shots);
        int new_shots = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(max_shots) + 1));
        std::vector<Choice> fresh = shot_subtree_choices(new_shots);
        out.choices.erase(out.choices.begin() + s_pos,
                          out.choices.begin() + static_cast<std::ptrdiff_t>(s_end));
        out.choices.insert(out.choices.begin() + s_pos, fresh.begin(), fresh.end());
        if (new_shots < static_cast<int>(out.example_seeds.size())) {
            out.example_seeds.resize(static_cast<std::size_t>(new_shots));
        } else {
            while (out.example_seeds.size() < static_cast<std::size_t>(new_shots))
                out.example_seeds.push_back(rng.next_u64());
        }
    }
    for (auto& seed : out.example_seeds) {
        if (rng.bernoulli(mut_chance)) seed = rng.next_u64();
    }
    return out;
}

}  // namespace prompt_elites
