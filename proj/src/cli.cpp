// SPDX-License-Identifier: Apache-2.0
#include "prompt_elites/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "prompt_elites/csv.hpp"
#include "prompt_elites/errors.hpp"
#include "prompt_elites/evolve.hpp"
#include "prompt_elites/exports.hpp"
#include "prompt_elites/stats.hpp"

namespace prompt_elites {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string sanitize(std::string_view name) {
    std::string out;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else if (!out.empty() && out.back() != '-')
            out += '-';
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out.empty() ? "task" : out;
}

std::string percent(double fraction) {
    std::ostringstream os;
    os.precision(1);
    os << std::fixed << fraction * 100.0;
    return os.str();
}

// --------------------------------------------------------------------------
// run

struct RunFlags {
    std::string task_path;
    std::string algo = "map-elites";
    std::string endpoint;
    std::string token_env = "PROMPT_ELITES_API_TOKEN";
    std::string mock;
    std::uint64_t mock_seed = 0;
    int population = 50;
    int iterations = 10;
    double mut_rate = 0.40;
    double mut_chance = 0.40;
    int evaluations = 50;
    std::vector<int> bin_sizes{2, 25, 2};
    int max_shots = 10;
    std::uint64_t seed = 0;
    int parallelism = 1;
    std::string out_dir = ".";
    double threshold = 0.55;
    std::vector<int> universe{5, 5};
    std::string grammar_path;
    std::string tables_path;
    std::string model_tag;
    std::string cache_dir;
    int timeout_ms = 30000;
    int retries = 3;
};

int do_run(const RunFlags& f) {
    if (!f.mock.empty() && !f.endpoint.empty())
        throw ConfigError("--mock and --endpoint are mutually exclusive");
    if (f.mock.empty() && f.endpoint.empty())
        throw ConfigError("need an evaluator: pass --mock <rule> or --endpoint <url>");
    if (f.bin_sizes.size() != 3) throw ConfigError("--bin-sizes expects three widths, e.g. 2,25,2");

    TaskDataset task = load_task(f.task_path);
    Grammar grammar = f.grammar_path.empty() ? Grammar::default_grammar()
                                             : Grammar::load_file(f.grammar_path);
    GenericTables tables = f.tables_path.empty() ? GenericTables::defaults()
                                                 : GenericTables::load_file(f.tables_path);

    EvaluatorConfig ecfg;
    std::string model_tag = f.model_tag;
    if (!f.mock.empty()) {
        ecfg.kind = EvaluatorKind::Mock;
        ecfg.mock_rule = parse_mock_rule(f.mock, f.mock_seed);
        if (model_tag.empty()) model_tag = "mock-" + sanitize(ecfg.mock_rule.name);
    } else {
        ecfg.kind = EvaluatorKind::Remote;
        ecfg.endpoint = f.endpoint;
        ecfg.token_env = f.token_env;
        ecfg.timeout_ms = f.timeout_ms;
        ecfg.retry_budget = f.retries;
        if (!f.cache_dir.empty()) {
            ecfg.cache_enabled = true;
            ecfg.cache_dir = f.cache_dir;
        }
        if (model_tag.empty()) model_tag = "remote";
    }

    RunConfig cfg;
    cfg.population_size = f.population;
    cfg.num_iterations = f.iterations;
    cfg.mut_rate = f.mut_rate;
    cfg.mut_chance = f.mut_chance;
    cfg.num_evaluations = f.evaluations;
    cfg.bin_config = {f.bin_sizes[0], f.bin_sizes[1], f.bin_sizes[2]};
    cfg.max_shots = f.max_shots;
    cfg.seed = f.seed;
    cfg.algorithm = algorithm_from_string(f.algo);
    cfg.parallelism = f.parallelism;
    cfg.hp_threshold = f.threshold;
    cfg.coverage_universe = f.universe;

    Evaluator evaluator(ecfg);
    auto progress = [&](const IterationRecord& r) {
        std::cout << "iter " << r.iteration << "/" << cfg.num_iterations
                  << "  fitness min/mean/max=" << format_double(r.fitness_min) << "/"
                  << format_double(r.fitness_mean) << "/" << format_double(r.fitness_max)
                  << "  archive=" << r.archive_size << "  cov_any=" << percent(r.coverage_any)
                  << "%  cov_hp=" << percent(r.coverage_hp) << "%";
        if (r.evaluator_failures > 0) std::cout << "  failures=" << r.evaluator_failures;
        std::cout << "\n";
    };
    RunResult rr = cfg.algorithm == Algorithm::MapElites
                       ? run_map_elites(cfg, task, grammar, tables, evaluator, progress)
                       : run_random_search(cfg, task, grammar, tables, evaluator, progress);
    rr.log.model_tag = model_tag;

    fs::create_directories(f.out_dir);
    const std::string stem = sanitize(task.name) + "_" + f.algo + "_" + sanitize(model_tag) +
                             "_seed" + std::to_string(f.seed);
    const fs::path base = fs::path(f.out_dir) / stem;
    write_text_file((base.string() + ".archive.json"), archive_to_json_text(rr.archive));
    write_text_file((base.string() + ".archive.csv"), archive_to_csv_text(rr.archive));
    write_text_file((base.string() + ".runlog.json"), run_log_to_json_text(cfg, rr.log));
    write_text_file((base.string() + ".population.csv"),
                    population_to_csv_text(rr.log.population_records));

    std::cout << "run complete: " << rr.log.total_model_calls << " model calls, archive "
              << rr.archive.size() << " elites, wall " << format_double(rr.log.wall_time_ms / 1000.0)
              << " s" << (rr.log.degraded ? " [DEGRADED: evaluator failures]" : "") << "\n"
              << "exports: " << base.string() << ".{archive.json,archive.csv,runlog.json,population.csv}"
              << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// analyze / compare

struct AnalyzeFlags {
    std::string map_path;
    std::string random_path;
    std::string archive_path;  // single-archive mode
    std::vector<std::string> population_paths;
    double threshold = 0.55;
    std::vector<int> universe{5, 5};
    std::string out_dir = ".";
    bool enrichment = false;
};

ordered_json stat_to_json(const StatResult& s) {
    ordered_json j{{"statistic", s.statistic},
                   {"p_value", s.p_value},
                   {"significant", s.significant},
                   {"degenerate", s.degenerate}};
    if (s.effect_size) j["effect_size"] = *s.effect_size;
    return j;
}

ordered_json coverage_section(const Archive& map_archive, const Archive& random_archive,
                              double threshold, const std::vector<int>& universe,
                              CsvWriter& csv_out) {
    const std::vector<Axis> axes{Axis::Shots, Axis::Depth};
    const double map_hp = coverage(map_archive, axes, threshold, universe);
    const double map_any = coverage(map_archive, axes, 0.0, universe);
    const double rnd_hp = coverage(random_archive, axes, threshold, universe);
    const double rnd_any = coverage(random_archive, axes, 0.0, universe);
    const ContingencyTable2x2 table =
        coverage_contingency(map_archive, random_archive, threshold, universe);
    const StatResult chi = chi_square_2x2_yates(table);
    const double v = chi.effect_size.value_or(0.0);

    csv_out.row({"map_hp_pct", "map_any_pct", "random_hp_pct", "random_any_pct", "chi_square",
                 "p_value", "cramers_v", "effect", "significant"});
    csv_out.row({percent(map_hp), percent(map_any), percent(rnd_hp), percent(rnd_any),
                 format_double(chi.statistic), format_double(chi.p_value), format_double(v),
                 effect_size_label(v), chi.significant ? "1" : "0"});

    ordered_json j;
    j["threshold"] = threshold;
    j["universe"] = universe;
    j["map"] = {{"hp", map_hp}, {"any", map_any}};
    j["random"] = {{"hp", rnd_hp}, {"any", rnd_any}};
    j["contingency"] = {table.a, table.b, table.c, table.d};
    j["chi_square"] = stat_to_json(chi);
    j["effect"] = effect_size_label(v);
    return j;
}

ordered_json spearman_section(const std::vector<PopulationRow>& rows, CsvWriter& csv_out) {
    struct FeatureColumn {
        const char* name;
        double (*value)(const PopulationRow&);
    };
    static const FeatureColumn kColumns[] = {
        {"shots", [](const PopulationRow& r) { return static_cast<double>(r.shots); }},
        {"word_count", [](const PopulationRow& r) { return static_cast<double>(r.word_count); }},
        {"depth", [](const PopulationRow& r) { return static_cast<double>(r.depth); }},
        {"has_context", [](const PopulationRow& r) { return r.has_context ? 1.0 : 0.0; }},
        {"ttr", [](const PopulationRow& r) { return r.ttr; }},
    };
    std::vector<double> fitness;
    fitness.reserve(rows.size());
    for (const auto& r : rows) fitness.push_back(r.fitness);

    csv_out.row({"feature", "spearman_rho", "p_value", "significant"});
    ordered_json j = ordered_json::array();
    for (const FeatureColumn& col : kColumns) {
        std::vector<double> x;
        x.reserve(rows.size());
        for (const auto& r : rows) x.push_back(col.value(r));
        const StatResult s = spearman(x, fitness);
        csv_out.row({col.name, format_double(s.statistic), format_double(s.p_value),
                     s.significant ? "1" : "0"});
        ordered_json entry = stat_to_json(s);
        entry["feature"] = col.name;
        j.push_back(std::move(entry));
    }
    return j;
}

ordered_json enrichment_section(const std::vector<PopulationRow>& rows, double threshold,
                                CsvWriter& csv_out) {
    const EnrichmentReport report = enrichment_report(rows, threshold);
    csv_out.row({"feature", "overall_pct", "hp_pct", "z", "p_value", "marker", "complement_pct",
                 "z_vs_complement", "p_vs_complement", "marker_vs_complement"});
    ordered_json features = ordered_json::array();
    for (const FeatureEnrichment& fe : report.features) {
        csv_out.row({fe.feature, percent(fe.overall_proportion), percent(fe.hp_proportion),
                     format_double(fe.vs_overall.statistic), format_double(fe.vs_overall.p_value),
                     fe.vs_overall.significant ? "†" : "", percent(fe.complement_proportion),
                     format_double(fe.vs_complement.statistic),
                     format_double(fe.vs_complement.p_value),
                     fe.vs_complement.significant ? "†" : ""});
        ordered_json entry;
        entry["feature"] = fe.feature;
        entry["overall_proportion"] = fe.overall_proportion;
        entry["hp_proportion"] = fe.hp_proportion;
        entry["vs_overall"] = stat_to_json(fe.vs_overall);
        entry["complement_proportion"] = fe.complement_proportion;
        entry["vs_complement"] = stat_to_json(fe.vs_complement);
        features.push_back(std::move(entry));
    }
    ordered_json j;
    j["population_size"] = report.population_size;
    j["high_performer_count"] = report.high_performer_count;
    j["threshold"] = report.threshold;
    j["features"] = std::move(features);
    return j;
}

std::vector<PopulationRow> rows_from_archive(const Archive& archive) {
    std::vector<PopulationRow> rows;
    for (const Individual& e : archive.elites()) {
        rows.push_back({e.phenotype.shots, e.phenotype.word_count, e.phenotype.depth,
                        e.phenotype.has_context, e.ttr, e.fitness});
    }
    return rows;
}

int do_analyze(const AnalyzeFlags& f) {
    const bool have_pair = !f.map_path.empty() && !f.random_path.empty();
    if (!f.map_path.empty() != !f.random_path.empty())
        throw ConfigError("--map and --random must be given together");
    if (!have_pair && f.archive_path.empty() && f.population_paths.empty())
        throw ConfigError("analyze needs --map/--random, --archive, or --population inputs");
    if (f.universe.size() != 2) throw ConfigError("--universe expects two bin counts, e.g. 5,5");

    fs::create_directories(f.out_dir);
    ordered_json report;
    report["threshold"] = f.threshold;

    std::vector<PopulationRow> rows;
    for (const std::string& path : f.population_paths) {
        auto part = load_population(path);
        rows.insert(rows.end(), part.begin(), part.end());
    }

    if (have_pair) {
        Archive map_archive = load_archive(f.map_path);
        Archive random_archive = load_archive(f.random_path);
        CsvWriter csv;
        report["coverage"] = coverage_section(map_archive, random_archive, f.threshold, f.universe, csv);
        write_text_file((fs::path(f.out_dir) / "analysis_coverage.csv").string(), csv.str());
        if (rows.empty()) {
            auto a = rows_from_archive(map_archive);
            auto b = rows_from_archive(random_archive);
            rows.insert(rows.end(), a.begin(), a.end());
            rows.insert(rows.end(), b.begin(), b.end());
        }
    }
    if (!f.archive_path.empty() && rows.empty()) rows = rows_from_archive(load_archive(f.archive_path));

    if (!rows.empty()) {
        CsvWriter csv;
        report["spearman"] = spearman_section(rows, csv);
        write_text_file((fs::path(f.out_dir) / "analysis_spearman.csv").string(), csv.str());
    }
    if (f.enrichment) {
        if (rows.empty()) throw ConfigError("--enrichment needs population or archive rows");
        CsvWriter csv;
        report["enrichment"] = enrichment_section(rows, f.threshold, csv);
        write_text_file((fs::path(f.out_dir) / "analysis_enrichment.csv").string(), csv.str());
    }

    const std::string report_path = (fs::path(f.out_dir) / "analysis.json").string();
    write_text_file(report_path, report.dump(2) + "\n");
    std::cout << "analysis written to " << report_path << "\n";
    return 0;
}

int do_compare(const AnalyzeFlags& f, const std::string& out_path) {
    if (f.map_path.empty() || f.random_path.empty())
        throw ConfigError("compare needs --map and --random archive exports");
    Archive map_archive = load_archive(f.map_path);
    Archive random_archive = load_archive(f.random_path);
    CsvWriter csv;
    ordered_json section = coverage_section(map_archive, random_archive, f.threshold, f.universe, csv);
    const double v = section["chi_square"].contains("effect_size")
                         ? section["chi_square"]["effect_size"].get<double>()
                         : 0.0;
    std::cout << "map_hp=" << percent(section["map"]["hp"].get<double>())
              << "% random_hp=" << percent(section["random"]["hp"].get<double>())
              << "% chi2=" << format_double(section["chi_square"]["statistic"].get<double>())
              << " p=" << format_double(section["chi_square"]["p_value"].get<double>())
              << " V=" << format_double(v) << " (" << section["effect"].get<std::string>() << ")"
              << (section["chi_square"]["significant"].get<bool>() ? " significant" : "") << "\n";
    if (!out_path.empty()) write_text_file(out_path, section.dump(2) + "\n");
    return 0;
}

// --------------------------------------------------------------------------
// heatmap

const char* kSvgShapeContext = "rect";

std::string fitness_color(double f) {
    // blue (low) to red (high)
    const int r0 = 59, g0 = 76, b0 = 192, r1 = 180, g1 = 4, b1 = 38;
    const double t = std::clamp(f, 0.0, 1.0);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(r0 + t * (r1 - r0)),
                  static_cast<int>(g0 + t * (g1 - g0)), static_cast<int>(b0 + t * (b1 - b0)));
    return buf;
}

std::string heatmap_svg(const std::vector<Individual>& elites) {
    int max_shots = 1, max_depth = 1;
    for (const Individual& e : elites) {
        max_shots = std::max(max_shots, e.phenotype.shots);
        max_depth = std::max(max_depth, e.phenotype.depth);
    }
    const double width = 640, height = 480, margin = 56;
    const double plot_w = width - 2 * margin, plot_h = height - 2 * margin;
    auto sx = [&](double shots) { return margin + (shots + 0.5) / (max_shots + 1) * plot_w; };
    auto sy = [&](double depth) { return height - margin - (depth + 0.5) / (max_depth + 1) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " " << height
        << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"#444\"/>\n"
        << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"14\">examples (shots)</text>\n"
        << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"14\" "
        << "transform=\"rotate(-90 16 " << height / 2 << ")\">reasoning depth</text>\n";
    for (int s = 0; s <= max_shots; ++s)
        svg << "<text x=\"" << sx(s) << "\" y=\"" << height - margin + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << s << "</text>\n";
    for (int d = 0; d <= max_depth; ++d)
        svg << "<text x=\"" << margin - 10 << "\" y=\"" << sy(d) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << d << "</text>\n";
    for (const Individual& e : elites) {
        const std::string color = fitness_color(e.fitness);
        const double x = sx(e.phenotype.shots), y = sy(e.phenotype.depth);
        if (e.phenotype.has_context) {
            svg << "<" << kSvgShapeContext << " x=\"" << x - 6 << "\" y=\"" << y - 6
                << "\" width=\"12\" height=\"12\" fill=\"" << color << "\" fill-opacity=\"0.85\"/>\n";
        } else {
            svg << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"6\" fill=\"" << color
                << "\" fill-opacity=\"0.85\"/>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

int do_heatmap(const std::string& archive_path, const std::string& out_path,
               const std::string& svg_path) {
    Archive archive = load_archive(archive_path);
    const std::vector<Individual> elites = archive.elites();
    if (elites.empty()) std::cerr << "warning: archive is empty; writing header-only CSV\n";

    CsvWriter csv;
    csv.row({"shots", "depth", "fitness", "has_context"});
    for (const Individual& e : elites) {
        csv.row({std::to_string(e.phenotype.shots), std::to_string(e.phenotype.depth),
                 format_double(e.fitness), e.phenotype.has_context ? "1" : "0"});
    }
    write_text_file(out_path, csv.str());
    if (!svg_path.empty()) write_text_file(svg_path, heatmap_svg(elites));
    std::cout << "heatmap CSV written to " << out_path << "\n";
    return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
    CLI::App app{"grammar-driven MAP-Elites search over LLM prompt structures", "prompt-elites"};
    app.require_subcommand(1);

    RunFlags rf;
    CLI::App* run_cmd = app.add_subcommand("run", "evolve prompts against a task");
    run_cmd->add_option("--task", rf.task_path, "task dataset JSON")->required();
    run_cmd->add_option("--algo", rf.algo, "map-elites or random")
        ->check(CLI::IsMember({"map-elites", "random"}));
    run_cmd->add_option("--endpoint", rf.endpoint, "remote completion endpoint URL");
    run_cmd->add_option("--token-env", rf.token_env, "env var holding the bearer token");
    run_cmd->add_option("--mock", rf.mock,
                        "mock rule: constant[:p], zero-shot-only, shots-reward, noisy-threshold");
    run_cmd->add_option("--mock-seed", rf.mock_seed, "seed for mock rule noise");
    run_cmd->add_option("--population", rf.population, "population size per iteration");
    run_cmd->add_option("--iterations", rf.iterations, "number of iterations");
    run_cmd->add_option("--mut-rate", rf.mut_rate, "fraction of the population mutated");
    run_cmd->add_option("--mut-chance", rf.mut_chance, "per-locus mutation probability");
    run_cmd->add_option("--evaluations", rf.evaluations, "task instances per fitness evaluation");
    run_cmd->add_option("--bin-sizes", rf.bin_sizes, "bin widths shots,words,depth")->delimiter(',');
    run_cmd->add_option("--max-shots", rf.max_shots, "example budget per prompt");
    run_cmd->add_option("--seed", rf.seed, "run seed");
    run_cmd->add_option("--parallelism", rf.parallelism, "max concurrent fitness evaluations");
    run_cmd->add_option("--out-dir", rf.out_dir, "output directory");
    run_cmd->add_option("--threshold", rf.threshold, "high-performer fitness threshold");
    run_cmd->add_option("--universe", rf.universe, "coverage universe bins shots,depth")->delimiter(',');
    run_cmd->add_option("--grammar", rf.grammar_path, "grammar override JSON");
    run_cmd->add_option("--tables", rf.tables_path, "generic tables JSON");
    run_cmd->add_option("--model-tag", rf.model_tag, "tag embedded in export file names");
    run_cmd->add_option("--cache-dir", rf.cache_dir, "response cache directory (remote only)");
    run_cmd->add_option("--timeout-ms", rf.timeout_ms, "per-request timeout");
    run_cmd->add_option("--retries", rf.retries, "retry budget per request");

    AnalyzeFlags af;
    CLI::App* analyze_cmd = app.add_subcommand("analyze", "statistics over run exports");
    analyze_cmd->add_option("--map", af.map_path, "MAP-Elites archive JSON");
    analyze_cmd->add_option("--random", af.random_path, "random-search archive JSON");
    analyze_cmd->add_option("--archive", af.archive_path, "single archive JSON (elite rows)");
    analyze_cmd->add_option("--population", af.population_paths, "population CSV (repeatable)");
    analyze_cmd->add_option("--threshold", af.threshold, "high-performer fitness threshold");
    analyze_cmd->add_option("--universe", af.universe, "coverage universe bins shots,depth")
        ->delimiter(',');
    analyze_cmd->add_option("--out-dir", af.out_dir, "output directory");
    analyze_cmd->add_flag("--enrichment", af.enrichment, "emit the feature-enrichment table");

    AnalyzeFlags cf;
    std::string compare_out;
    CLI::App* compare_cmd = app.add_subcommand("compare", "coverage contingency of two archives");
    compare_cmd->add_option("--map", cf.map_path, "MAP-Elites archive JSON")->required();
    compare_cmd->add_option("--random", cf.random_path, "random-search archive JSON")->required();
    compare_cmd->add_option("--threshold", cf.threshold, "high-performer fitness threshold");
    compare_cmd->add_option("--universe", cf.universe, "coverage universe bins shots,depth")
        ->delimiter(',');
    compare_cmd->add_option("--out", compare_out, "write the comparison JSON here");

    std::string hm_archive, hm_out = "heatmap.csv", hm_svg;
    CLI::App* heatmap_cmd = app.add_subcommand("heatmap", "per-elite feature-space export");
    heatmap_cmd->add_option("--archive", hm_archive, "archive JSON")->required();
    heatmap_cmd->add_option("--out", hm_out, "output CSV path");
    heatmap_cmd->add_option("--svg", hm_svg, "optional SVG scatter path");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) return do_run(rf);
        if (analyze_cmd->parsed()) return do_analyze(af);
        if (compare_cmd->parsed()) return do_compare(cf, compare_out);
        if (heatmap_cmd->parsed()) return do_heatmap(hm_archive, hm_out, hm_svg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace prompt_elites
