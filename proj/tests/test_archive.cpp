// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "prompt_elites/archive.hpp"
#include "prompt_elites/errors.hpp"
#include "test_helpers.hpp"

using namespace prompt_elites;

namespace {

Individual dummy(int shots, int words, int depth, double fitness, int id = 0) {
    Individual ind;
    ind.id = id;
    ind.phenotype = {shots, words, depth, false};
    ind.fitness = fitness;
    ind.eval_count = 1;
    return ind;
}

}  // namespace

TEST_CASE("try_insert semantics: insert, replace, reject ties") {
    Archive archive;
    CHECK(archive.try_insert(dummy(0, 10, 0, 0.6), 1) == InsertOutcome::Inserted);
    CHECK(archive.size() == 1);
    CHECK(archive.try_insert(dummy(0, 10, 0, 0.8), 1) == InsertOutcome::Replaced);
    CHECK(archive.try_insert(dummy(0, 10, 0, 0.7), 2) == InsertOutcome::Rejected);
    CHECK(archive.try_insert(dummy(0, 10, 0, 0.8), 2) == InsertOutcome::Rejected);  // tie
    CHECK(archive.size() == 1);
    CHECK(archive.elites()[0].fitness == 0.8);

    // different words bin -> separate cell
    CHECK(archive.try_insert(dummy(0, 40, 0, 0.1), 3) == InsertOutcome::Inserted);
    CHECK(archive.size() == 2);
}

TEST_CASE("insertion log is strictly increasing per cell") {
    Archive archive;
    archive.try_insert(dummy(2, 30, 4, 0.2), 1);
    archive.try_insert(dummy(2, 30, 4, 0.5), 2);
    archive.try_insert(dummy(2, 30, 4, 0.4), 3);
    archive.try_insert(dummy(2, 30, 4, 0.9), 4);
    REQUIRE(archive.insertion_log().size() == 3);
    CHECK_FALSE(archive.insertion_log()[0].old_fitness.has_value());
    CHECK(*archive.insertion_log()[1].old_fitness == 0.2);
    CHECK(*archive.insertion_log()[2].old_fitness == 0.5);
    double prev = -1.0;
    for (const auto& e : archive.insertion_log()) {
        CHECK(e.new_fitness > prev);
        prev = e.new_fitness;
    }
}

TEST_CASE("elites are ordered by bin key and reflect replacements") {
    Archive archive;
    CHECK(archive.elites().empty());
    archive.try_insert(dummy(4, 10, 2, 0.3, 7), 1);
    CHECK(archive.elites().size() == 1);
    archive.try_insert(dummy(4, 10, 2, 0.6, 8), 2);
    auto elites = archive.elites();
    REQUIRE(elites.size() == 1);
    CHECK(elites[0].id == 8);

    archive.try_insert(dummy(0, 10, 2, 0.2, 9), 2);
    elites = archive.elites();
    REQUIRE(elites.size() == 2);
    CHECK(elites[0].id == 9);  // shots_bin 0 sorts first
}

TEST_CASE("coverage over the shots x depth projection") {
    Archive archive;
    const std::vector<Axis> axes{Axis::Shots, Axis::Depth};
    const std::vector<int> universe{5, 5};
    CHECK(coverage(archive, axes, 0.55, universe) == 0.0);

    // 5 zero-shot cells, distinct depth bins, all above threshold -> 20%
    for (int depth_bin = 0; depth_bin < 5; ++depth_bin)
        archive.try_insert(dummy(0, 10 + 30 * depth_bin, depth_bin * 2, 0.9), 1);
    CHECK(coverage(archive, axes, 0.55, universe) == doctest::Approx(0.20));

    // words bins do not multiply shots x depth cells
    archive.try_insert(dummy(0, 200, 0, 0.95), 2);
    CHECK(coverage(archive, axes, 0.55, universe) == doctest::Approx(0.20));

    // out-of-universe cells are not counted
    archive.try_insert(dummy(0, 10, 10, 0.99), 3);  // depth_bin 5
    CHECK(coverage(archive, axes, 0.55, universe) == doctest::Approx(0.20));
    CHECK(coverage(archive, axes, 0.55, {5, 6}) == doctest::Approx(6.0 / 30.0));
}

TEST_CASE("coverage is anti-monotone in the threshold") {
    Rng rng(88);
    Archive archive;
    for (int i = 0; i < 300; ++i) {
        archive.try_insert(dummy(static_cast<int>(rng.uniform_index(10)),
                                 static_cast<int>(rng.uniform_index(120)),
                                 static_cast<int>(rng.uniform_index(11)), rng.uniform01()),
                           1);
    }
    const std::vector<Axis> axes{Axis::Shots, Axis::Depth};
    const std::vector<int> universe{5, 5};
    double prev = 1.1;
    for (double threshold : {0.0, 0.2, 0.4, 0.55, 0.7, 0.9}) {
        double c = coverage(archive, axes, threshold, universe);
        CHECK(c <= prev);
        prev = c;
    }
}

TEST_CASE("re-inserting the current elite is rejected") {
    Archive archive;
    Individual ind = dummy(1, 20, 3, 0.75);
    archive.try_insert(ind, 1);
    CHECK(archive.try_insert(ind, 2) == InsertOutcome::Rejected);
}

TEST_CASE("archive JSON round-trip preserves cells and log") {
    Archive archive;
    Genotype gen;
    gen.choices = {{"P", 1}, {"S", 1}, {"R", 0}, {"E", 0}, {"I", 0}};
    Individual ind;
    ind.id = 3;
    ind.genotype = gen;
    ind.phenotype = {0, 33, 0, false};
    ind.fitness = 0.74;
    ind.eval_count = 50;
    ind.ttr = 0.5;
    ind.provenance = {2, 1};
    archive.try_insert(ind, 2);

    const std::string json = archive_to_json_text(archive);
    Archive back = archive_from_json_text(json);
    REQUIRE(back.size() == 1);
    const std::vector<Individual> elites = back.elites();
    const Individual& e = elites[0];
    CHECK(e.id == 3);
    CHECK(e.fitness == 0.74);
    CHECK(e.genotype == gen);
    CHECK(e.provenance.parent_id == 1);
    CHECK(back.insertion_log().size() == 1);
    CHECK(archive_to_json_text(back) == json);

    CHECK_THROWS_AS(archive_from_json_text("{}"), SchemaError);
    CHECK_THROWS_AS(archive_from_json_text("no"), ParseError);
}

TEST_CASE("unevaluated individuals are refused") {
    Archive archive;
    Individual ind = dummy(0, 0, 0, 0.5);
    ind.eval_count = 0;
    CHECK_THROWS_AS(archive.try_insert(ind, 1), ConfigError);
}
