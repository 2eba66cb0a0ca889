// SPDX-License-Identifier: Apache-2.0
#include "prompt_elites/tasks.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "prompt_elites/errors.hpp"

namespace prompt_elites {

TaskDataset task_from_json_text(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("task JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("task JSON: top level must be an object");

    TaskDataset task;
    for (const char* field : {"name", "task_request", "llm_instruction"}) {
        if (!doc.contains(field) || !doc[field].is_string())
            throw SchemaError(field, "required string");
    }
    task.name = doc["name"].get<std::string>();
    task.task_request = doc["task_request"].get<std::string>();
    task.llm_instruction = doc["llm_instruction"].get<std::string>();

    if (doc.contains("choices")) {
        if (!doc["choices"].is_array()) throw SchemaError("choices", "expected an array of strings");
        for (const auto& c : doc["choices"]) task.choices.push_back(c.get<std::string>());
    }

    if (!doc.contains("instances") || !doc["instances"].is_array() || doc["instances"].empty())
        throw SchemaError("instances", "required non-empty array");
    std::unordered_set<std::string> label_set(task.choices.begin(), task.choices.end());
    int index = 0;
    for (const auto& entry : doc["instances"]) {
        std::string at = "instances[" + std::to_string(index) + "]";
        if (!entry.is_object() || !entry.contains("input") || !entry.contains("target"))
            throw SchemaError(at, "each instance needs input and target");
        TaskInstance inst{entry["input"].get<std::string>(), entry["target"].get<std::string>()};
        if (inst.input.empty() || inst.target.empty())
            throw SchemaError(at, "input and target must be non-empty");
        if (!label_set.empty() && !label_set.count(inst.target))
            throw SchemaError(at, "target '" + inst.target + "' not in choices");
        task.instances.push_back(std::move(inst));
        ++index;
    }
    return task;
}

TaskDataset load_task(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read task file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return task_from_json_text(buf.str());
}

std::vector<int> sample_eval_instances(const TaskDataset& task, int n, Rng& rng) {
    const int pool = static_cast<int>(task.instances.size());
    if (n < 0 || n > pool)
        throw NotEnoughInstances("requested " + std::to_string(n) + " of " + std::to_string(pool) +
                                 " instances");
    std::vector<int> indices(static_cast<std::size_t>(pool));
    std::iota(indices.begin(), indices.end(), 0);
    // Partial Fisher-Yates: the first n entries are a uniform sample without
    // replacement.
    for (int i = 0; i < n; ++i) {
        std::size_t j = static_cast<std::size_t>(i) +
                        rng.uniform_index(static_cast<std::size_t>(pool - i));
        std::swap(indices[static_cast<std::size_t>(i)], indices[j]);
    }
    indices.resize(static_cast<std::size_t>(n));
    return indices;
}

namespace {

std::string render_example(const TaskInstance& inst) {
    return "Q: " + inst.input + "\nA: " + inst.target;
}

// Seed -> preferred instance; collisions (evaluated instance or an earlier
// slot) resolve by deterministic forward probing.
int draw_example_index(std::uint64_t seed, int pool, int excluded,
                       const std::unordered_set<int>& used) {
    Rng slot_rng(seed);
    int idx = static_cast<int>(slot_rng.uniform_index(static_cast<std::size_t>(pool)));
    while (idx == excluded || used.count(idx)) idx = (idx + 1) % pool;
    return idx;
}

InstantiatedPrompt render(const PromptTemplate& tmpl, const TaskDataset& task, int instance_index,
                          std::span<const std::uint64_t> example_seeds, bool include_task_entry) {
    const int pool = static_cast<int>(task.instances.size());
    const int excluded = instance_index;  // -1 = nothing excluded
    const int available = pool - (excluded >= 0 ? 1 : 0);
    if (tmpl.summary.shots > available)
        throw InsufficientExamples("template needs " + std::to_string(tmpl.summary.shots) +
                                   " examples but only " + std::to_string(available) +
                                   " instances are available");
    if (static_cast<std::size_t>(tmpl.summary.shots) > example_seeds.size())
        throw InsufficientExamples("genotype carries " + std::to_string(example_seeds.size()) +
                                   " example seeds for " + std::to_string(tmpl.summary.shots) +
                                   " slots");

    InstantiatedPrompt result;
    result.instance_index = instance_index;
    std::unordered_set<int> used;
    std::size_t slot = 0;
    std::string text;
    for (const TemplateFragment& frag : tmpl.fragments) {
        std::string piece;
        if (!frag.is_placeholder) {
            piece = frag.text;
        } else {
            switch (frag.slot) {
                case TaskSlot::TaskRequest: piece = task.task_request; break;
                case TaskSlot::LlmInstruction: piece = task.llm_instruction; break;
                case TaskSlot::TaskEntry:
                    if (!include_task_entry) continue;
                    piece = task.instances[static_cast<std::size_t>(instance_index)].input;
                    break;
                case TaskSlot::Example: {
                    int idx = draw_example_index(example_seeds[slot++], pool, excluded, used);
                    used.insert(idx);
                    result.example_ids.push_back(idx);
                    piece = render_example(task.instances[static_cast<std::size_t>(idx)]);
                    break;
                }
            }
        }
        if (!text.empty()) text += '\n';
        text += piece;
    }
    result.text = std::move(text);
    return result;
}

}  // namespace

InstantiatedPrompt instantiate(const PromptTemplate& tmpl, const TaskDataset& task,
                               int instance_index, std::span<const std::uint64_t> example_seeds) {
    if (instance_index < 0 || static_cast<std::size_t>(instance_index) >= task.instances.size())
        throw ConfigError("instance index out of range: " + std::to_string(instance_index));
    return render(tmpl, task, instance_index, example_seeds, /*include_task_entry=*/true);
}

std::string reference_prompt_text(const PromptTemplate& tmpl, const TaskDataset& task,
                                  std::span<const std::uint64_t> example_seeds) {
    return render(tmpl, task, -1, example_seeds, /*include_task_entry=*/false).text;
}

}  // namespace prompt_elites
