// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "prompt_elites/errors.hpp"
#include "prompt_elites/random.hpp"
#include "prompt_elites/stats.hpp"

using namespace prompt_elites;

TEST_CASE("chi-square anchors from the coverage pairs") {
    // 96% vs 44% on 25 bins
    auto r1 = chi_square_2x2_yates({24, 1, 11, 14});
    CHECK(r1.statistic == doctest::Approx(13.71).epsilon(0.001));
    CHECK(r1.p_value == doctest::Approx(0.0002).epsilon(0.5));
    CHECK(std::fabs(r1.p_value - 0.0002) < 0.0005);
    CHECK(*r1.effect_size == doctest::Approx(0.523).epsilon(0.005));
    CHECK(r1.significant);

    // 96% vs 60%
    auto r2 = chi_square_2x2_yates({24, 1, 15, 10});
    CHECK(r2.statistic == doctest::Approx(7.46).epsilon(0.002));
    CHECK(std::fabs(r2.p_value - 0.006) < 0.0005);
    CHECK(*r2.effect_size == doctest::Approx(0.386).epsilon(0.01));

    // 92% vs 64%
    auto r3 = chi_square_2x2_yates({23, 2, 16, 9});
    CHECK(r3.statistic == doctest::Approx(4.2).epsilon(0.005));
    CHECK(std::fabs(r3.p_value - 0.040) < 0.001);
    CHECK(*r3.effect_size == doctest::Approx(0.289).epsilon(0.01));

    // 56% vs 52%: continuity term floors to zero
    auto r4 = chi_square_2x2_yates({14, 11, 13, 12});
    CHECK(r4.statistic == 0.0);
    CHECK(r4.p_value == 1.0);
    CHECK(*r4.effect_size == 0.0);
    CHECK_FALSE(r4.significant);
}

TEST_CASE("chi-square is invariant under row and column swaps") {
    const ContingencyTable2x2 t{19, 6, 9, 16};
    auto base = chi_square_2x2_yates(t);
    auto rows = chi_square_2x2_yates({t.c, t.d, t.a, t.b});
    auto cols = chi_square_2x2_yates({t.b, t.a, t.d, t.c});
    CHECK(base.statistic == doctest::Approx(rows.statistic).epsilon(1e-12));
    CHECK(base.statistic == doctest::Approx(cols.statistic).epsilon(1e-12));
}

TEST_CASE("degenerate marginals are flagged") {
    auto r = chi_square_2x2_yates({0, 0, 5, 20});
    CHECK(r.degenerate);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("cramers v and labels") {
    CHECK(cramers_v(13.71, 50) == doctest::Approx(0.5236).epsilon(0.001));
    CHECK(cramers_v(0.0, 50) == 0.0);
    CHECK(cramers_v(4.2, 50) == doctest::Approx(0.2898).epsilon(0.001));
    CHECK(std::string(effect_size_label(0.1)) == "small");
    CHECK(std::string(effect_size_label(0.3)) == "medium");
    CHECK(std::string(effect_size_label(0.6)) == "large");
    for (long n : {1L, 10L, 100L}) {
        for (double chi : {0.0, 1.0, 4.0})
            if (chi <= static_cast<double>(n)) CHECK(cramers_v(chi, n) <= 1.0);
    }
}

TEST_CASE("spearman basics") {
    const std::vector<double> inc{1, 2, 3, 4, 5};
    const std::vector<double> dec{5, 4, 3, 2, 1};
    CHECK(spearman(inc, inc).statistic == doctest::Approx(1.0));
    CHECK(spearman(inc, dec).statistic == doctest::Approx(-1.0));
    CHECK(spearman(inc, inc).p_value == doctest::Approx(0.0));

    // oracle-computed: [2,1,4,3,5] has squared rank differences summing to 4
    const std::vector<double> y{2, 1, 4, 3, 5};
    CHECK(spearman(inc, y).statistic == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(spearman(inc, y).statistic == doctest::Approx(oracles::spearman_rho(inc, y)).epsilon(1e-13));
    // the sum-6 permutation: rho = 1 - 6*6/(5*24) = 0.7
    const std::vector<double> y6{2, 3, 1, 4, 5};
    CHECK(spearman(inc, y6).statistic == doctest::Approx(0.7).epsilon(1e-12));

    const std::vector<double> constant{3, 3, 3, 3, 3};
    auto degen = spearman(inc, constant);
    CHECK(degen.degenerate);
    CHECK(degen.p_value == 1.0);

    CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ConfigError);
}

TEST_CASE("spearman matches the counting oracle on 100 random vectors") {
    Rng rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + rng.uniform_index(40);
        std::vector<double> x(n), y(n);
        const bool with_ties = trial % 3 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = with_ties ? static_cast<double>(rng.uniform_index(6)) : rng.uniform01();
            y[i] = with_ties ? static_cast<double>(rng.uniform_index(6)) : rng.uniform01();
        }
        auto result = spearman(x, y);
        if (result.degenerate) continue;  // constant column sampled
        const double expected = oracles::spearman_rho(x, y);
        CHECK(std::fabs(result.statistic - expected) <= 1e-12);
    }
}

TEST_CASE("spearman invariances") {
    Rng rng(777);
    std::vector<double> x(20), y(20);
    for (auto& v : x) v = rng.uniform01();
    for (auto& v : y) v = rng.uniform01();
    auto ab = spearman(x, y);
    auto ba = spearman(y, x);
    CHECK(ab.statistic == doctest::Approx(ba.statistic).epsilon(1e-12));

    std::vector<double> tx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) tx[i] = std::exp(3.0 * x[i]) + 7.0;  // monotone
    CHECK(spearman(tx, y).statistic == doctest::Approx(ab.statistic).epsilon(1e-12));
}

TEST_CASE("two-proportion z-test") {
    auto equal = two_proportion_z(20, 50, 40, 100);
    CHECK(equal.statistic == doctest::Approx(0.0));
    CHECK(equal.p_value == doctest::Approx(1.0));

    auto r = two_proportion_z(50, 100, 30, 100);
    CHECK(r.statistic == doctest::Approx(2.88675).epsilon(0.001));
    CHECK(r.p_value == doctest::Approx(0.00389).epsilon(0.01));
    CHECK(r.significant);

    auto degen = two_proportion_z(0, 50, 0, 50);
    CHECK(degen.degenerate);
    CHECK(degen.p_value == 1.0);

    auto ab = two_proportion_z(13, 40, 22, 57);
    auto ba = two_proportion_z(22, 57, 13, 40);
    CHECK(ab.statistic == doctest::Approx(-ba.statistic).epsilon(1e-12));
}

TEST_CASE("p-values match the numerical-integration oracle to 1e-8") {
    for (double z : {0.1, 0.5, 1.0, 1.96, 2.88675, 3.5, 5.0}) {
        CHECK(std::fabs(normal_two_sided_p(z) - oracles::normal_two_sided_p(z)) < 1e-8);
    }
    for (double x : {0.01, 0.5, 1.0, 3.84, 7.46, 13.71, 20.0}) {
        CHECK(std::fabs(chi_square_sf_1df(x) - oracles::chi_square_sf_1df(x)) < 1e-8);
    }
    for (int dof : {3, 5, 10, 48}) {
        for (double t : {0.2, 1.0, 2.5, 4.0}) {
            CHECK(std::fabs(student_t_two_sided_p(t, dof) -
                            oracles::student_t_two_sided_p(t, dof)) < 1e-8);
        }
    }
}

TEST_CASE("enrichment report over constructed populations") {
    std::vector<PopulationRow> rows;
    // 80 individuals: 20 zero-shot (all high performers), 60 few/many-shot low
    for (int i = 0; i < 20; ++i) rows.push_back({0, 30, 0, false, 0.8, 0.9});
    for (int i = 0; i < 30; ++i) rows.push_back({2, 60, 1, true, 0.7, 0.2});
    for (int i = 0; i < 30; ++i) rows.push_back({5, 90, 3, false, 0.6, 0.3});

    EnrichmentReport report = enrichment_report(rows, 0.55);
    CHECK(report.population_size == 80);
    CHECK(report.high_performer_count == 20);

    const FeatureEnrichment* zero = nullptr;
    double shot_sum_overall = 0.0, cot_sum_overall = 0.0;
    for (const auto& fe : report.features) {
        if (fe.feature == "0-shot") zero = &fe;
        if (fe.feature == "0-shot" || fe.feature == "few-shot" || fe.feature == "many-shot")
            shot_sum_overall += fe.overall_proportion;
        if (fe.feature == "no-cot" || fe.feature == "cot-1" || fe.feature == "cot-2plus")
            cot_sum_overall += fe.overall_proportion;
    }
    REQUIRE(zero != nullptr);
    CHECK(zero->hp_proportion == 1.0);
    CHECK(zero->overall_proportion == doctest::Approx(0.25));
    CHECK(zero->vs_overall.significant);
    CHECK(zero->vs_overall.statistic > 0.0);  // enriched
    CHECK(shot_sum_overall == doctest::Approx(1.0));  // categories partition
    CHECK(cot_sum_overall == doctest::Approx(1.0));

    SUBCASE("all high performers: z = 0 against overall, degenerate complement") {
        std::vector<PopulationRow> all_hp(10, {0, 30, 0, false, 0.8, 0.9});
        EnrichmentReport r = enrichment_report(all_hp, 0.55);
        for (const auto& fe : r.features) {
            CHECK(fe.vs_overall.statistic == doctest::Approx(0.0));
            CHECK(fe.vs_complement.degenerate);
        }
    }
    SUBCASE("no high performers throws") {
        std::vector<PopulationRow> low(10, {0, 30, 0, false, 0.8, 0.1});
        CHECK_THROWS_AS(enrichment_report(low, 0.55), NoHighPerformers);
    }
}

TEST_CASE("coverage contingency mirrors the archive pair") {
    Archive map_archive, random_archive;
    auto mk = [](int shots, int depth, double f) {
        Individual ind;
        ind.phenotype = {shots, 10, depth, false};
        ind.fitness = f;
        ind.eval_count = 1;
        return ind;
    };
    // MAP covers 24 of 25 high; random 11
    int placed = 0;
    for (int s = 0; s < 5 && placed < 24; ++s)
        for (int d = 0; d < 5 && placed < 24; ++d, ++placed)
            map_archive.try_insert(mk(s * 2, d * 2, 0.9), 1);
    placed = 0;
    for (int s = 0; s < 5 && placed < 11; ++s)
        for (int d = 0; d < 5 && placed < 11; ++d, ++placed)
            random_archive.try_insert(mk(s * 2, d * 2, 0.9), 1);

    ContingencyTable2x2 t = coverage_contingency(map_archive, random_archive, 0.55, {5, 5});
    CHECK(t.a == 24);
    CHECK(t.b == 1);
    CHECK(t.c == 11);
    CHECK(t.d == 14);
    auto r = chi_square_2x2_yates(t);
    CHECK(r.statistic == doctest::Approx(13.71).epsilon(0.001));

    SUBCASE("empty archives give the all-uncovered table") {
        Archive empty_a, empty_b;
        ContingencyTable2x2 e = coverage_contingency(empty_a, empty_b, 0.55, {5, 5});
        CHECK(e.a == 0);
        CHECK(e.b == 25);
        CHECK(e.c == 0);
        CHECK(e.d == 25);
    }
}
