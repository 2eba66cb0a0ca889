// SPDX-License-Identifier: Apache-2.0
#ifndef PROMPT_ELITES_TASKS_HPP
#define PROMPT_ELITES_TASKS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prompt_elites/grammar.hpp"
#include "prompt_elites/random.hpp"

namespace prompt_elites {

struct TaskInstance {
    std::string input;
    std::string target;
};

/// One benchmark task: the task request (R), the LLM instruction (I), the
/// answer-bearing instances, and optionally the admissible answer labels.
struct TaskDataset {
    std::string name;
    std::string task_request;
    std::string llm_instruction;
    std::vector<std::string> choices;  // empty = free-form answers
    std::vector<TaskInstance> instances;
};

/// Parses and invariant-checks a task JSON file:
///   { "name", "task_request", "llm_instruction", "choices"?: [..],
///     "instances": [{"input","target"}, ..] }
/// Throws ParseError / SchemaError (naming the offending field).
TaskDataset load_task(const std::string& path);
TaskDataset task_from_json_text(const std::string& json_text);

/// n distinct instance indices, uniform without replacement, deterministic
/// per seed. Throws NotEnoughInstances when n exceeds the pool.
std::vector<int> sample_eval_instances(const TaskDataset& task, int n, Rng& rng);

struct InstantiatedPrompt {
    std::string text;
    int instance_index = -1;
    std::vector<int> example_ids;
};

/// Fills the template's task placeholders for one evaluation instance.
/// Each [[example]] slot draws its instance from the slot's seed, excluding
/// the evaluated instance and previously used slots (deterministic probing on
/// collision). Fragments are joined with single newlines. Examples render as
/// "Q: {input}\nA: {target}".
/// Throws InsufficientExamples when shots exceed the available pool or the
/// seed list is shorter than the slot count.
InstantiatedPrompt instantiate(const PromptTemplate& tmpl, const TaskDataset& task,
                               int instance_index, std::span<const std::uint64_t> example_seeds);

/// The individual's stable measurement text: same rendering as instantiate
/// but with the variable [[task entry]] dropped and no instance exclusion.
/// Word-count and type-token-ratio descriptors are computed on this.
std::string reference_prompt_text(const PromptTemplate& tmpl, const TaskDataset& task,
                                  std::span<const std::uint64_t> example_seeds);

}  // namespace prompt_elites

#endif
