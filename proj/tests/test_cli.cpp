// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "prompt_elites/cli.hpp"
#include "prompt_elites/csv.hpp"
#include "prompt_elites/exports.hpp"
#include "test_helpers.hpp"

using namespace prompt_elites;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("pe-cli-" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& leaf = "") const {
        return leaf.empty() ? path.string() : (path / leaf).string();
    }
};

std::string write_task_file(const TempDir& dir) {
    auto task = test_helpers::tiny_task(24);
    std::string json = R"({"name": "toy-parity", "task_request": ")" + task.task_request +
                       R"(", "llm_instruction": ")" + task.llm_instruction +
                       R"(", "choices": ["Yes", "No"], "instances": [)";
    for (std::size_t i = 0; i < task.instances.size(); ++i) {
        if (i) json += ",";
        json += R"({"input": ")" + task.instances[i].input + R"(", "target": ")" +
                task.instances[i].target + R"("})";
    }
    json += "]}";
    const std::string path = dir.str("task.json");
    write_text_file(path, json);
    return path;
}

std::vector<std::string> run_args(const std::string& task, const std::string& out_dir,
                                  const std::string& algo, const std::string& seed) {
    return {"run",          "--task",       task,        "--algo",  algo,
            "--mock",       "noisy-threshold", "--seed", seed,      "--population",
            "12",           "--iterations", "3",         "--evaluations", "8",
            "--out-dir",    out_dir};
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli({"run"}) == 2);                       // missing --task
    CHECK(run_cli({"frobnicate"}) == 2);                // unknown subcommand
    CHECK(run_cli({}) == 2);                            // no subcommand
    CHECK(run_cli({"heatmap"}) == 2);                   // missing --archive
    CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("run + analyze + heatmap pipeline on mock evaluator") {
    TempDir dir("pipeline");
    const std::string task = write_task_file(dir);

    CHECK(run_cli(run_args(task, dir.str(), "map-elites", "7")) == 0);
    CHECK(run_cli(run_args(task, dir.str(), "random", "7")) == 0);

    const std::string map_archive = dir.str("toy-parity_map-elites_mock-noisy-threshold_seed7.archive.json");
    const std::string rnd_archive = dir.str("toy-parity_random_mock-noisy-threshold_seed7.archive.json");
    const std::string map_population = dir.str("toy-parity_map-elites_mock-noisy-threshold_seed7.population.csv");
    REQUIRE(fs::exists(map_archive));
    REQUIRE(fs::exists(rnd_archive));
    REQUIRE(fs::exists(map_population));
    CHECK(fs::exists(dir.str("toy-parity_map-elites_mock-noisy-threshold_seed7.runlog.json")));
    CHECK(fs::exists(dir.str("toy-parity_map-elites_mock-noisy-threshold_seed7.archive.csv")));

    SUBCASE("analyze consumes the run exports unchanged") {
        CHECK(run_cli({"analyze", "--map", map_archive, "--random", rnd_archive, "--population",
                       map_population, "--enrichment", "--out-dir", dir.str("report")}) == 0);
        CHECK(fs::exists(dir.str("report") + "/analysis.json"));
        const std::string coverage = read_text_file(dir.str("report") + "/analysis_coverage.csv");
        CHECK(coverage.find("chi_square") != std::string::npos);
        CHECK(coverage.find("cramers_v") != std::string::npos);
        const std::string spearman_csv = read_text_file(dir.str("report") + "/analysis_spearman.csv");
        CHECK(spearman_csv.find("ttr") != std::string::npos);
        CHECK(spearman_csv.find("word_count") != std::string::npos);
        const std::string enrichment = read_text_file(dir.str("report") + "/analysis_enrichment.csv");
        CHECK(enrichment.find("0-shot") != std::string::npos);
        CHECK(enrichment.find("cot-2plus") != std::string::npos);
    }

    SUBCASE("heatmap rows equal elite count") {
        CHECK(run_cli({"heatmap", "--archive", map_archive, "--out", dir.str("h.csv"), "--svg",
                       dir.str("h.svg")}) == 0);
        auto rows = parse_csv(read_text_file(dir.str("h.csv")));
        Archive archive = load_archive(map_archive);
        CHECK(rows.size() == archive.size() + 1);  // header
        CHECK(rows[0] == std::vector<std::string>{"shots", "depth", "fitness", "has_context"});
        const std::string svg = read_text_file(dir.str("h.svg"));
        CHECK(svg.find("<svg") != std::string::npos);
    }

    SUBCASE("compare prints the contingency row") {
        CHECK(run_cli({"compare", "--map", map_archive, "--random", rnd_archive, "--out",
                       dir.str("cmp.json")}) == 0);
        const std::string cmp = read_text_file(dir.str("cmp.json"));
        CHECK(cmp.find("chi_square") != std::string::npos);
    }
}

TEST_CASE("random algorithm is byte-deterministic across CLI invocations") {
    TempDir dir_a("det-a");
    TempDir dir_b("det-b");
    const std::string task_a = write_task_file(dir_a);
    const std::string task_b = write_task_file(dir_b);
    CHECK(run_cli(run_args(task_a, dir_a.str(), "random", "11")) == 0);
    CHECK(run_cli(run_args(task_b, dir_b.str(), "random", "11")) == 0);
    for (const char* leaf :
         {"toy-parity_random_mock-noisy-threshold_seed11.archive.json",
          "toy-parity_random_mock-noisy-threshold_seed11.runlog.json",
          "toy-parity_random_mock-noisy-threshold_seed11.population.csv"}) {
        CHECK(read_text_file(dir_a.str(leaf)) == read_text_file(dir_b.str(leaf)));
    }
}

TEST_CASE("runtime failures exit with 1") {
    TempDir dir("fail");
    CHECK(run_cli({"run", "--task", dir.str("missing.json"), "--mock", "constant"}) == 1);
    const std::string task = write_task_file(dir);
    CHECK(run_cli({"run", "--task", task}) == 1);  // neither --mock nor --endpoint
    CHECK(run_cli({"analyze", "--map", dir.str("nope.json"), "--random", dir.str("nope.json")}) == 1);
    CHECK(run_cli({"analyze"}) == 1);  // no inputs at all
}

TEST_CASE("empty archive heatmap writes a header-only CSV") {
    TempDir dir("empty");
    Archive empty;
    write_text_file(dir.str("empty.json"), archive_to_json_text(empty));
    CHECK(run_cli({"heatmap", "--archive", dir.str("empty.json"), "--out", dir.str("e.csv")}) == 0);
    auto rows = parse_csv(read_text_file(dir.str("e.csv")));
    CHECK(rows.size() == 1);
}
