// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "prompt_elites/errors.hpp"
#include "prompt_elites/phenotype.hpp"
#include "prompt_elites/tasks.hpp"
#include "test_helpers.hpp"

using namespace prompt_elites;
using test_helpers::geno;
using test_helpers::tiny_task;

TEST_CASE("extract combines structure summary and word count") {
    Grammar g = Grammar::default_grammar();
    GenericTables tables = GenericTables::defaults();

    SUBCASE("zero-shot no-context") {
        auto gen = geno({{"P", 1}, {"S", 1}, {"R", 0}, {"E", 0}, {"I", 0}});
        Phenotype p = extract(expand(gen, g, tables), "three words here");
        CHECK(p.shots == 0);
        CHECK_FALSE(p.has_context);
        CHECK(p.depth == 0);
        CHECK(p.word_count == 3);
    }
    SUBCASE("published genotype example") {
        auto gen = geno({{"P", 2}, {"C", 6}, {"S", 0}, {"R", 0}, {"X", 0}, {"T", 3}, {"E", 0}, {"I", 0}}, 1);
        Phenotype p = extract(expand(gen, g, tables), "x");
        CHECK(p.shots == 1);
        CHECK(p.has_context);
        CHECK(p.depth == 4);
    }
    SUBCASE("forced tokenization: 37 words") {
        std::string text;
        for (int i = 0; i < 37; ++i) text += "w" + std::to_string(i) + (i % 5 == 0 ? "\n" : " ");
        auto gen = geno({{"P", 1}, {"S", 1}, {"R", 0}, {"E", 0}, {"I", 0}});
        CHECK(extract(expand(gen, g, tables), text).word_count == 37);
    }
}

TEST_CASE("binning is floor division") {
    BinConfig cfg;  // (2, 25, 2)
    CHECK(bin_key({3, 37, 5, false}, cfg) == BinKey{1, 1, 2});
    CHECK(bin_key({0, 0, 0, false}, cfg) == BinKey{0, 0, 0});
    CHECK(bin_key({0, 0, 10, false}, cfg).depth_bin == 5);
    CHECK_THROWS_AS(bin_key({0, 0, 0, false}, BinConfig{0, 25, 2}), ConfigError);
}

TEST_CASE("bin indices are monotone per axis") {
    BinConfig cfg{2, 25, 2};
    for (int v = 0; v < 60; ++v) {
        CHECK(bin_key({v + 1, 0, 0, false}, cfg).shots_bin >= bin_key({v, 0, 0, false}, cfg).shots_bin);
        CHECK(bin_key({0, v + 1, 0, false}, cfg).words_bin >= bin_key({0, v, 0, false}, cfg).words_bin);
        CHECK(bin_key({0, 0, v + 1, false}, cfg).depth_bin >= bin_key({0, 0, v, false}, cfg).depth_bin);
    }
}

TEST_CASE("shot and CoT categories partition their domains") {
    CHECK(shot_category(0) == ShotCategory::ZeroShot);
    CHECK(shot_category(1) == ShotCategory::FewShot);
    CHECK(shot_category(2) == ShotCategory::FewShot);
    CHECK(shot_category(3) == ShotCategory::ManyShot);
    CHECK(shot_category(50) == ShotCategory::ManyShot);

    CHECK(cot_category(0) == CotCategory::NoCot);
    CHECK(cot_category(1) == CotCategory::Cot1);
    CHECK(cot_category(2) == CotCategory::Cot2Plus);
    CHECK(cot_category(7) == CotCategory::Cot2Plus);

    for (int v = 0; v <= 20; ++v) {
        int shot_hits = (shot_category(v) == ShotCategory::ZeroShot) +
                        (shot_category(v) == ShotCategory::FewShot) +
                        (shot_category(v) == ShotCategory::ManyShot);
        CHECK(shot_hits == 1);
        int cot_hits = (cot_category(v) == CotCategory::NoCot) +
                       (cot_category(v) == CotCategory::Cot1) +
                       (cot_category(v) == CotCategory::Cot2Plus);
        CHECK(cot_hits == 1);
    }
}

TEST_CASE("type-token ratio with normalization") {
    CHECK(type_token_ratio("the cat sat on the mat") == doctest::Approx(5.0 / 6.0));
    CHECK(type_token_ratio("all distinct words here") == 1.0);
    CHECK(type_token_ratio("A a A.") == doctest::Approx(1.0 / 3.0));
    CHECK(type_token_ratio("Word") == 1.0);
    CHECK_THROWS_AS(type_token_ratio("   \n\t "), EmptyTextError);
}

TEST_CASE("ttr is in (0,1] and 1 iff all normalized words distinct") {
    CHECK(type_token_ratio("x y z") == 1.0);
    double r = type_token_ratio("x x x x");
    CHECK(r > 0.0);
    CHECK(r <= 1.0);
    CHECK(r == doctest::Approx(0.25));
}

TEST_CASE("extract-shots equals example placeholders for random genotypes") {
    Grammar g = Grammar::default_grammar();
    GenericTables tables = GenericTables::defaults();
    TaskDataset task = tiny_task(12);
    Rng rng(31337);
    for (int i = 0; i < 500; ++i) {
        Genotype gen = random_genotype(g, rng, 8);
        PromptTemplate tmpl = expand(gen, g, tables);
        int slots = 0;
        for (const auto& frag : tmpl.fragments)
            if (frag.is_placeholder && frag.slot == TaskSlot::Example) ++slots;
        Phenotype p = extract(tmpl, reference_prompt_text(tmpl, task, gen.example_seeds));
        CHECK(p.shots == slots);
    }
}
