// SPDX-License-Identifier: Apache-2.0
//
// Minimal RFC-4180 CSV support: header row, comma separation, quoting only
// where needed. Enough for the analysis exports; not a general CSV library.
#ifndef PROMPT_ELITES_CSV_HPP
#define PROMPT_ELITES_CSV_HPP

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "prompt_elites/errors.hpp"

namespace prompt_elites {

/// Shortest round-trip decimal form, deterministic across runs.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

class CsvWriter {
public:
    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ += ',';
            out_ += escape(fields[i]);
        }
        out_ += "\r\n";
    }

    const std::string& str() const { return out_; }

private:
    static std::string escape(std::string_view field) {
        if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
        std::string quoted = "\"";
        for (char c : field) {
            if (c == '"') quoted += '"';
            quoted += c;
        }
        quoted += '"';
        return quoted;
    }

    std::string out_;
};

/// Parses RFC-4180 text (tolerates bare LF line ends). Returns rows of fields;
/// the caller interprets the header.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace prompt_elites

#endif
