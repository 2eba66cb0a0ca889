// SPDX-License-Identifier: Apache-2.0
#include "prompt_elites/phenotype.hpp"

#include <unordered_set>

#include "prompt_elites/errors.hpp"
#include "prompt_elites/text.hpp"

namespace prompt_elites {

Phenotype extract(const PromptTemplate& tmpl, std::string_view reference_text) {
    Phenotype p;
    p.shots = tmpl.summary.shots;
    p.depth = tmpl.summary.depth;
    p.has_context = tmpl.summary.has_context;
    p.word_count = static_cast<int>(word_count(reference_text));
    return p;
}

BinKey bin_key(const Phenotype& p, const BinConfig& cfg) {
    if (cfg.shots_width < 1 || cfg.words_width < 1 || cfg.depth_width < 1)
        throw ConfigError("bin widths must be >= 1");
    return {p.shots / cfg.shots_width, p.word_count / cfg.words_width, p.depth / cfg.depth_width};
}

ShotCategory shot_category(int shots) {
    if (shots <= 0) return ShotCategory::ZeroShot;
    if (shots <= 2) return ShotCategory::FewShot;
    return ShotCategory::ManyShot;
}

CotCategory cot_category(int depth) {
    if (depth <= 0) return CotCategory::NoCot;
    if (depth == 1) return CotCategory::Cot1;
    return CotCategory::Cot2Plus;
}

const char* to_string(ShotCategory c) {
    switch (c) {
        case ShotCategory::ZeroShot: return "0-shot";
        case ShotCategory::FewShot: return "few-shot";
        case ShotCategory::ManyShot: return "many-shot";
    }
    return "";
}

const char* to_string(CotCategory c) {
    switch (c) {
        case CotCategory::NoCot: return "no-cot";
        case CotCategory::Cot1: return "cot-1";
        case CotCategory::Cot2Plus: return "cot-2plus";
    }
    return "";
}

double type_token_ratio(std::string_view text) {
    auto tokens = split_whitespace(text);
    if (tokens.empty()) throw EmptyTextError("type_token_ratio on empty text");
    std::unordered_set<std::string> types;
    for (std::string_view tok : tokens) types.insert(normalize_token(tok));
    return static_cast<double>(types.size()) / static_cast<double>(tokens.size());
}

}  // namespace prompt_elites
