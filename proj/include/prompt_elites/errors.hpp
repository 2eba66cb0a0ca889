// SPDX-License-Identifier: Apache-2.0
#ifndef PROMPT_ELITES_ERRORS_HPP
#define PROMPT_ELITES_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace prompt_elites {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input could not be parsed at all (bad JSON, bad CSV, ...).
struct ParseError : Error {
    using Error::Error;
};

/// Input parsed but violates the expected schema; `field` names the offender.
struct SchemaError : Error {
    explicit SchemaError(const std::string& field_name, const std::string& detail = "")
        : Error("schema error: field '" + field_name + "'" + (detail.empty() ? "" : ": " + detail)),
          field(field_name) {}
    std::string field;
};

/// Genotype does not replay against the grammar (see ValidationResult for the
/// structured, non-throwing variant).
struct GrammarError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct NotEnoughInstances : Error {
    using Error::Error;
};

struct InsufficientExamples : Error {
    using Error::Error;
};

struct EmptyTextError : Error {
    using Error::Error;
};

struct NoHighPerformers : Error {
    using Error::Error;
};

// Transport-level failures from the remote evaluator. Callers downgrade these
// to unmatched outcomes once the retry budget is exhausted.
struct TimeoutError : Error {
    using Error::Error;
};

struct HttpError : Error {
    HttpError(int status_code, const std::string& detail)
        : Error("http error " + std::to_string(status_code) + (detail.empty() ? "" : ": " + detail)),
          status(status_code) {}
    int status;
};

struct AuthError : Error {
    using Error::Error;
};

}  // namespace prompt_elites

#endif
