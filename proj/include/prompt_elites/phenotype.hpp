// SPDX-License-Identifier: Apache-2.0
#ifndef PROMPT_ELITES_PHENOTYPE_HPP
#define PROMPT_ELITES_PHENOTYPE_HPP

#include <compare>
#include <string_view>

#include "prompt_elites/grammar.hpp"

namespace prompt_elites {

/// Behavioral descriptors of an expressed prompt.
struct Phenotype {
    int shots = 0;
    int word_count = 0;
    int depth = 0;
    bool has_context = false;
    bool operator==(const Phenotype&) const = default;
};

/// Per-axis bin widths for discretizing (shots, word count, depth).
struct BinConfig {
    int shots_width = 2;
    int words_width = 25;
    int depth_width = 2;
};

struct BinKey {
    int shots_bin = 0;
    int words_bin = 0;
    int depth_bin = 0;
    auto operator<=>(const BinKey&) const = default;
};

/// shots/depth/context come from the template's structure summary; the word
/// count is the whitespace-token count of the reference prompt text (the
/// instantiated prompt with the variable task entry excluded).
Phenotype extract(const PromptTemplate& tmpl, std::string_view reference_text);

/// floor(value / width) per axis.
BinKey bin_key(const Phenotype& p, const BinConfig& cfg);

enum class ShotCategory { ZeroShot, FewShot, ManyShot };
enum class CotCategory { NoCot, Cot1, Cot2Plus };

/// 0 -> ZeroShot, 1-2 -> FewShot, >=3 -> ManyShot.
ShotCategory shot_category(int shots);

/// 0 -> NoCot, 1 -> Cot1, >=2 -> Cot2Plus.
CotCategory cot_category(int depth);

const char* to_string(ShotCategory c);
const char* to_string(CotCategory c);

/// Unique normalized words / total whitespace tokens. Normalization is
/// lowercase + strip surrounding punctuation. Throws EmptyTextError when no
/// tokens remain.
double type_token_ratio(std::string_view text);

}  // namespace prompt_elites

#endif
