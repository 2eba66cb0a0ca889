// SPDX-License-Identifier: Apache-2.0
#include "prompt_elites/evaluator.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "prompt_elites/errors.hpp"
#include "prompt_elites/text.hpp"

namespace prompt_elites {

namespace {

std::uint64_t phenotype_key(const Phenotype& p) {
    return mix_seed({static_cast<std::uint64_t>(p.shots), static_cast<std::uint64_t>(p.word_count),
                     static_cast<std::uint64_t>(p.depth), p.has_context ? 1ull : 0ull});
}

constexpr std::uint64_t kInstanceTag = 0x696e7374ull;  // per-instance noise stream
constexpr std::uint64_t kQualityTag = 0x7175616cull;   // per-individual quality stream

}  // namespace

MockRule make_mock_rule(const MockRuleSpec& spec) {
    const std::uint64_t seed = spec.seed;
    if (spec.name == "constant") {
        const double p = spec.param;
        return [seed, p](const Phenotype& ph, int instance) {
            return hash01({seed, kInstanceTag, phenotype_key(ph),
                           static_cast<std::uint64_t>(instance)}) < p;
        };
    }
    if (spec.name == "zero-shot-only") {
        return [](const Phenotype& ph, int) { return ph.shots == 0; };
    }
    if (spec.name == "shots-reward") {
        return [seed](const Phenotype& ph, int instance) {
            double p = 0.25;
            switch (shot_category(ph.shots)) {
                case ShotCategory::ZeroShot: p = 0.25; break;
                case ShotCategory::FewShot: p = 0.55; break;
                case ShotCategory::ManyShot: p = 0.85; break;
            }
            return hash01({seed, kInstanceTag, phenotype_key(ph),
                           static_cast<std::uint64_t>(instance)}) < p;
        };
    }
    if (spec.name == "first-k") {
        // matches exactly the instances with index < param; handy for pinning
        // exact fitness values
        const int k = static_cast<int>(spec.param);
        return [k](const Phenotype&, int instance) { return instance < k; };
    }
    if (spec.name == "noisy-threshold") {
        // Per-individual quality in [0.58, 0.82] plus seeded per-instance
        // noise; cells become high-performing once visited, so coverage
        // tracks how well the search reaches the feature space.
        return [seed](const Phenotype& ph, int instance) {
            const std::uint64_t key = phenotype_key(ph);
            const double quality = 0.70 + 0.24 * (hash01({seed, kQualityTag, key}) - 0.5);
            return hash01({seed, kInstanceTag, key, static_cast<std::uint64_t>(instance)}) < quality;
        };
    }
    throw ConfigError("unknown mock rule: " + spec.name);
}

MockRuleSpec parse_mock_rule(const std::string& text, std::uint64_t seed) {
    MockRuleSpec spec;
    spec.seed = seed;
    std::size_t colon = text.find(':');
    spec.name = text.substr(0, colon);
    if (colon != std::string::npos) {
        try {
            spec.param = std::stod(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("bad mock rule parameter in '" + text + "'");
        }
    }
    make_mock_rule(spec);  // reject unknown names early
    return spec;
}

MatchDecision match_answer(std::string_view raw_output, std::string_view target,
                           const std::vector<std::string>& choices) {
    const std::string out = normalize_token(raw_output);
    const std::string want = normalize_token(target);
    if (out.empty()) return {};
    if (out == want) return {true, false};
    if (!choices.empty()) {
        std::vector<std::string> candidates;
        for (const std::string& choice : choices) {
            const std::string c = normalize_token(choice);
            if (c.empty()) continue;
            if (out.starts_with(c) || c.starts_with(out)) candidates.push_back(c);
        }
        if (candidates.size() >= 2) return {false, true};
        if (candidates.size() == 1) return {candidates[0] == want, false};
    }
    return {};
}

// ---------------------------------------------------------------------------
// Remote transport

namespace {

struct ParsedUrl {
    bool https = false;
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    ParsedUrl out;
    std::string rest;
    if (url.starts_with("https://")) {
        out.https = true;
        rest = url.substr(8);
    } else if (url.starts_with("http://")) {
        rest = url.substr(7);
    } else {
        throw ConfigError("endpoint must start with http:// or https://: " + url);
    }
    std::size_t slash = rest.find('/');
    std::string host = slash == std::string::npos ? rest : rest.substr(0, slash);
    if (host.empty()) throw ConfigError("endpoint has no host: " + url);
    out.base = (out.https ? "https://" : "http://") + host;
    out.path = slash == std::string::npos ? "/" : rest.substr(slash);
    return out;
}

std::string truncate_tokens(const std::string& text, int max_tokens) {
    auto tokens = split_whitespace(text);
    if (static_cast<int>(tokens.size()) <= max_tokens) return std::string(trim(text));
    std::string out;
    for (int i = 0; i < max_tokens; ++i) {
        if (i) out += ' ';
        out += tokens[static_cast<std::size_t>(i)];
    }
    return out;
}

std::string extract_completion(const std::string& body) {
    // Hugging Face style bodies: [{"generated_text": ...}] or
    // {"generated_text": ...}; anything else is taken verbatim.
    try {
        auto doc = nlohmann::json::parse(body);
        if (doc.is_array() && !doc.empty() && doc[0].contains("generated_text"))
            return doc[0]["generated_text"].get<std::string>();
        if (doc.is_object() && doc.contains("generated_text"))
            return doc["generated_text"].get<std::string>();
        if (doc.is_string()) return doc.get<std::string>();
    } catch (const nlohmann::json::exception&) {
    }
    return body;
}

std::string cache_key_for(const EvaluatorConfig& cfg, const std::string& prompt) {
    std::uint64_t h1 = fnv1a(prompt);
    std::uint64_t h2 = mix_seed({h1, fnv1a(cfg.endpoint),
                                 static_cast<std::uint64_t>(cfg.max_output_tokens),
                                 static_cast<std::uint64_t>(cfg.temperature * 1e6)});
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(h1),
                  static_cast<unsigned long long>(h2));
    return buf;
}

}  // namespace

Evaluator::Evaluator(EvaluatorConfig config) : config_(std::move(config)) {
    if (config_.max_output_tokens < 1) throw ConfigError("max_output_tokens must be >= 1");
    if (config_.temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (config_.kind == EvaluatorKind::Mock) {
        mock_rule_ = make_mock_rule(config_.mock_rule);
    } else if (config_.endpoint.empty()) {
        throw ConfigError("remote evaluator needs an endpoint");
    }
    if (config_.cache_enabled && !config_.cache_dir.empty())
        std::filesystem::create_directories(config_.cache_dir);
}

std::string Evaluator::cache_lookup(const std::string& key) {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    if (!config_.cache_dir.empty()) {
        std::ifstream in(std::filesystem::path(config_.cache_dir) / (key + ".txt"));
        if (in) {
            std::ostringstream buf;
            buf << in.rdbuf();
            cache_[key] = buf.str();
            return buf.str();
        }
    }
    return {};
}

void Evaluator::cache_store(const std::string& key, const std::string& value) {
    std::lock_guard lock(cache_mutex_);
    cache_[key] = value;
    if (!config_.cache_dir.empty()) {
        std::ofstream out(std::filesystem::path(config_.cache_dir) / (key + ".txt"));
        out << value;
    }
}

std::string Evaluator::complete_remote(const std::string& prompt_text) {
    const ParsedUrl url = parse_url(config_.endpoint);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url.https) throw ConfigError("built without OpenSSL; https endpoints unavailable");
#endif
    nlohmann::json body{{"inputs", prompt_text},
                        {"parameters",
                         {{"max_new_tokens", config_.max_output_tokens},
                          {"temperature", config_.temperature}}}};
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (const char* token = std::getenv(config_.token_env.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retry_budget; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.retry_backoff_ms << (attempt - 1)));
        }
        httplib::Client client(url.base);
        client.set_connection_timeout(0, config_.timeout_ms * 1000);
        client.set_read_timeout(0, config_.timeout_ms * 1000);
        client.set_write_timeout(0, config_.timeout_ms * 1000);
        total_calls_.fetch_add(1);
        auto res = client.Post(url.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;  // connection refused / timeout -> retry
        }
        if (res->status == 200) return extract_completion(res->body);
        if (res->status == 401 || res->status == 403)
            throw AuthError("endpoint rejected credentials (status " +
                            std::to_string(res->status) + ")");
        if (res->status == 429 || res->status >= 500) {
            last_error = "status " + std::to_string(res->status);
            continue;  // transient -> retry
        }
        throw HttpError(res->status, res->body.substr(0, 200));
    }
    throw TimeoutError("retries exhausted for " + config_.endpoint + " (" + last_error + ")");
}

std::string Evaluator::complete(const std::string& prompt_text) {
    if (config_.kind == EvaluatorKind::Mock) {
        total_calls_.fetch_add(1);
        return truncate_tokens(config_.mock_output, config_.max_output_tokens);
    }
    const bool use_cache = config_.cache_enabled;
    const std::string key = use_cache ? cache_key_for(config_, prompt_text) : std::string();
    if (use_cache) {
        std::string hit = cache_lookup(key);
        if (!hit.empty()) {
            total_cache_hits_.fetch_add(1);
            return truncate_tokens(hit, config_.max_output_tokens);
        }
    }
    std::string raw = complete_remote(prompt_text);
    if (use_cache) cache_store(key, raw);
    return truncate_tokens(raw, config_.max_output_tokens);
}

FitnessResult Evaluator::fitness(const Genotype& genotype, const TaskDataset& task,
                                 std::span<const int> instance_indices, const Grammar& grammar,
                                 const GenericTables& tables) {
    if (instance_indices.empty()) throw ConfigError("fitness needs at least one instance");
    PromptTemplate tmpl = expand(genotype, grammar, tables);
    const std::string reference = reference_prompt_text(tmpl, task, genotype.example_seeds);
    const Phenotype phenotype = extract(tmpl, reference);

    FitnessResult result;
    int matched_count = 0;
    for (int index : instance_indices) {
        InstantiatedPrompt prompt = instantiate(tmpl, task, index, genotype.example_seeds);
        EvalOutcome outcome;
        outcome.instance_index = index;
        const TaskInstance& instance = task.instances[static_cast<std::size_t>(index)];
        if (config_.kind == EvaluatorKind::Mock) {
            total_calls_.fetch_add(1);
            ++result.model_calls;
            outcome.matched = mock_rule_(phenotype, index);
            outcome.raw_output = outcome.matched ? instance.target : "";
        } else {
            const auto started = std::chrono::steady_clock::now();
            try {
                outcome.raw_output = complete(prompt.text);
                MatchDecision decision = match_answer(outcome.raw_output, instance.target, task.choices);
                outcome.matched = decision.matched;
                outcome.ambiguous = decision.ambiguous;
            } catch (const TimeoutError&) {
                outcome.transport_failed = true;
            } catch (const HttpError&) {
                outcome.transport_failed = true;
            }
            outcome.latency_ms = std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - started)
                                     .count();
            ++result.model_calls;
            if (outcome.transport_failed) {
                ++result.transport_failures;
                total_failures_.fetch_add(1);
            }
        }
        if (outcome.matched) ++matched_count;
        result.outcomes.push_back(std::move(outcome));
    }
    result.fitness = static_cast<double>(matched_count) /
                     static_cast<double>(instance_indices.size());
    return result;
}

FitnessResult fitness(const Genotype& genotype, const TaskDataset& task,
                      std::span<const int> instance_indices, const EvaluatorConfig& config,
                      const Grammar& grammar, const GenericTables& tables) {
    Evaluator evaluator(config);
    return evaluator.fitness(genotype, task, instance_indices, grammar, tables);
}

}  // namespace prompt_elites
