// SPDX-License-Identifier: Apache-2.0
#ifndef PROMPT_ELITES_TEXT_HPP
#define PROMPT_ELITES_TEXT_HPP

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace prompt_elites {

inline bool is_space_char(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// Splits on runs of whitespace; empty tokens never appear.
inline std::vector<std::string_view> split_whitespace(std::string_view text) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space_char(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space_char(text[i])) ++i;
        if (i > start) tokens.push_back(text.substr(start, i - start));
    }
    return tokens;
}

inline std::size_t word_count(std::string_view text) {
    return split_whitespace(text).size();
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space_char(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space_char(s.back())) s.remove_suffix(1);
    return s;
}

inline std::string_view strip_surrounding_punct(std::string_view s) {
    while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Token normalization shared by the type-token ratio and answer matching:
/// trim, strip surrounding punctuation, lowercase.
inline std::string normalize_token(std::string_view s) {
    return to_lower_ascii(strip_surrounding_punct(trim(s)));
}

}  // namespace prompt_elites

#endif
